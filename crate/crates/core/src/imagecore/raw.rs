//! Raw sidecar dumps for depths PGM cannot carry (12 and 24 bit).
//!
//! Layout: width, height, bit depth as little-endian `u32`, then one
//! little-endian `u32` per pixel, row-major.

use std::fs;
use std::path::Path;

use super::{BitDepth, Image, ImageError, Result};

const HEADER_BYTES: usize = 12;

pub fn encode_raw(image: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_BYTES + 4 * image.len());
    out.extend_from_slice(&(image.width() as u32).to_le_bytes());
    out.extend_from_slice(&(image.height() as u32).to_le_bytes());
    out.extend_from_slice(&image.depth().bits().to_le_bytes());
    for &p in image.pixels() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode_raw(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < HEADER_BYTES {
        return Err(ImageError::Truncated {
            expected: HEADER_BYTES,
            got: bytes.len(),
        });
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    let (width, height) = (word(0) as usize, word(1) as usize);
    let depth = BitDepth::from_bits(word(2))?;
    let expected = HEADER_BYTES + 4 * width * height;
    if bytes.len() < expected {
        return Err(ImageError::Truncated {
            expected,
            got: bytes.len(),
        });
    }
    let pixels = bytes[HEADER_BYTES..expected]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Image::new(width, height, depth, pixels)
}

pub fn save_raw(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_raw(image))?;
    Ok(())
}

pub fn load_raw(path: impl AsRef<Path>) -> Result<Image> {
    decode_raw(&fs::read(path)?)
}
