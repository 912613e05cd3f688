//! Grayscale rasters, PGM/raw file I/O, and the entropy-based change
//! measures used by the node agents.
//!
//! Pixels are stored row-major as `u32` so the same type covers the 8, 12,
//! 16 and 24 bit depths a sensor may be configured for. Only 8- and 16-bit
//! images have a PGM form; the other depths go through the raw sidecar
//! format in [`raw`].

mod pgm;
pub mod raw;
mod stats;
pub mod synth;

use std::fmt;

pub use pgm::{decode_pgm, encode_pgm, load_pgm, save_pgm};
pub use stats::{difference, entropy, error_measure, signal_strength, ErrorStats, Histogram};

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("image must be at least 2x2, got {width}x{height}")]
    TooSmall { width: usize, height: usize },
    #[error("expected {expected} pixels, got {got}")]
    PixelCount { expected: usize, got: usize },
    #[error("pixel value {value} does not fit in {bits} bits")]
    PixelRange { value: u32, bits: u32 },
    #[error("unsupported bit depth {0} (expected one of 8, 12, 16, 24)")]
    UnsupportedDepth(u32),
    #[error("image dimensions differ: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },
    #[error("image bit depths differ: {left} vs {right}")]
    DepthMismatch { left: u32, right: u32 },
    #[error("unsupported image format: magic {0:?} (only binary PGM \"P5\" is read)")]
    UnsupportedFormat(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("unsupported maxval {0} (expected 255 or 65535)")]
    UnsupportedMaxval(u32),
    #[error("bit depth {0} has no PGM representation; requantize to 8 or 16 bits first")]
    NoPgmForm(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = ImageError> = std::result::Result<T, E>;

/// Bits per pixel a sensor may be configured to deliver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BitDepth {
    Eight,
    Twelve,
    Sixteen,
    TwentyFour,
}

impl BitDepth {
    pub const ALL: [BitDepth; 4] = [
        BitDepth::Eight,
        BitDepth::Twelve,
        BitDepth::Sixteen,
        BitDepth::TwentyFour,
    ];

    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            8 => Ok(BitDepth::Eight),
            12 => Ok(BitDepth::Twelve),
            16 => Ok(BitDepth::Sixteen),
            24 => Ok(BitDepth::TwentyFour),
            other => Err(ImageError::UnsupportedDepth(other)),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Twelve => 12,
            BitDepth::Sixteen => 16,
            BitDepth::TwentyFour => 24,
        }
    }

    /// Largest representable gray level, `2^bits - 1`.
    pub fn max_value(self) -> u32 {
        (1u32 << self.bits()) - 1
    }
}

impl fmt::Display for BitDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

/// A 2-D grayscale raster.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    depth: BitDepth,
    pixels: Vec<u32>,
}

impl Image {
    pub fn new(width: usize, height: usize, depth: BitDepth, pixels: Vec<u32>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(ImageError::TooSmall { width, height });
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(ImageError::PixelCount {
                expected,
                got: pixels.len(),
            });
        }
        let max = depth.max_value();
        if let Some(&value) = pixels.iter().find(|&&p| p > max) {
            return Err(ImageError::PixelRange {
                value,
                bits: depth.bits(),
            });
        }
        Ok(Image {
            width,
            height,
            depth,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, depth: BitDepth, value: u32) -> Result<Self> {
        Image::new(width, height, depth, vec![value; width * height])
    }

    /// Builds an image from `f(x, y)`, clamping each value into range.
    pub fn from_fn(
        width: usize,
        height: usize,
        depth: BitDepth,
        mut f: impl FnMut(usize, usize) -> u32,
    ) -> Result<Self> {
        let max = depth.max_value();
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y).min(max));
            }
        }
        Image::new(width, height, depth, pixels)
    }

    /// Rounds and clamps real samples into the depth's range.
    pub fn from_reals(
        width: usize,
        height: usize,
        depth: BitDepth,
        samples: impl IntoIterator<Item = f64>,
    ) -> Result<Self> {
        let max = f64::from(depth.max_value());
        let pixels = samples.into_iter().map(|v| v.round().clamp(0.0, max) as u32).collect();
        Image::new(width, height, depth, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depth(&self) -> BitDepth {
        self.depth
    }

    pub fn pixels(&self) -> &[u32] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u32> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.pixels[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Uncompressed payload size in bits.
    pub fn size_bits(&self) -> u64 {
        self.len() as u64 * u64::from(self.depth.bits())
    }

    /// Uncompressed payload size in whole bytes.
    pub fn size_bytes(&self) -> usize {
        self.size_bits().div_ceil(8) as usize
    }

    pub fn same_shape(&self, other: &Image) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(ImageError::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            });
        }
        Ok(())
    }

    pub(crate) fn same_shape_and_depth(&self, other: &Image) -> Result<()> {
        self.same_shape(other)?;
        if self.depth != other.depth {
            return Err(ImageError::DepthMismatch {
                left: self.depth.bits(),
                right: other.depth.bits(),
            });
        }
        Ok(())
    }

    pub fn to_reals(&self) -> Vec<f64> {
        self.pixels.iter().map(|&p| f64::from(p)).collect()
    }
}

/// Rescales gray levels to another bit depth by a power-of-two shift.
///
/// Upscaling multiplies by `2^(target - source)`; downscaling truncates toward
/// zero. Dimensions are unchanged.
pub fn requantize(image: &Image, target: BitDepth) -> Image {
    let source = image.depth.bits();
    let to = target.bits();
    let pixels = if to >= source {
        let shift = to - source;
        image.pixels.iter().map(|&p| p << shift).collect()
    } else {
        let shift = source - to;
        image.pixels.iter().map(|&p| p >> shift).collect()
    };
    Image {
        width: image.width,
        height: image.height,
        depth: target,
        pixels,
    }
}
