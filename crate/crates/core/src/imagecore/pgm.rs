//! Binary PGM (P5) codec.
//!
//! Header: `P5`, whitespace, width, height, maxval, exactly one whitespace
//! byte, then big-endian samples (one byte per sample when maxval < 256).
//! `#` comments are skipped on read and never written.

use std::fs;
use std::path::Path;

use super::{BitDepth, Image, ImageError, Result};

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let bytes = fs::read(path)?;
    decode_pgm(&bytes)
}

pub fn save_pgm(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_pgm(image)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn encode_pgm(image: &Image) -> Result<Vec<u8>> {
    let maxval = match image.depth() {
        BitDepth::Eight => 255u32,
        BitDepth::Sixteen => 65535,
        other => return Err(ImageError::NoPgmForm(other.bits())),
    };
    let header = format!("P5\n{} {}\n{}\n", image.width(), image.height(), maxval);
    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    let mut out = Vec::with_capacity(header.len() + image.len() * sample_bytes);
    out.extend_from_slice(header.as_bytes());
    for &p in image.pixels() {
        if sample_bytes == 1 {
            out.push(p as u8);
        } else {
            out.extend_from_slice(&(p as u16).to_be_bytes());
        }
    }
    Ok(out)
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 {
        return Err(ImageError::MalformedHeader("file shorter than magic".into()));
    }
    if &bytes[..2] != b"P5" {
        return Err(ImageError::UnsupportedFormat(
            String::from_utf8_lossy(&bytes[..2]).into_owned(),
        ));
    }
    let mut cursor = Header { bytes, pos: 2 };
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    // exactly one whitespace byte separates maxval from the raster
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(ImageError::MalformedHeader("missing whitespace after maxval".into())),
    }
    let depth = match maxval {
        255 => BitDepth::Eight,
        65535 => BitDepth::Sixteen,
        other => return Err(ImageError::UnsupportedMaxval(other as u32)),
    };
    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    let count = width
        .checked_mul(height)
        .ok_or_else(|| ImageError::MalformedHeader("dimensions overflow".into()))?;
    let expected = count * sample_bytes;
    let payload = &bytes[cursor.pos..];
    if payload.len() < expected {
        return Err(ImageError::Truncated {
            expected,
            got: payload.len(),
        });
    }
    let pixels = if sample_bytes == 1 {
        payload[..expected].iter().map(|&b| u32::from(b)).collect()
    } else {
        payload[..expected]
            .chunks_exact(2)
            .map(|c| u32::from(u16::from_be_bytes([c[0], c[1]])))
            .collect()
    };
    Image::new(width, height, depth, pixels)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::MalformedHeader(format!("expected {field}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::MalformedHeader(format!("{field} out of range")))
    }
}
