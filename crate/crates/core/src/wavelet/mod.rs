//! Separable 2-D discrete wavelet transform built from 1-D two-channel
//! filter banks.

mod dump;
mod filters;
mod pyramid;
mod transform;

pub use dump::dump_pyramid;
pub use filters::{basis_filters, Basis, Boundary, FilterBank};
pub use pyramid::{dwt2, dwt2_real, idwt2, idwt2_real, DetailBands, SubbandPyramid, BAND_NAMES};
pub use transform::{analysis_step_1d, synthesis_step_1d};

/// Deepest decomposition accepted.
pub const MAX_LEVELS: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum WaveletError {
    #[error("unknown wavelet basis {0:?}")]
    UnknownBasis(String),
    #[error("signal length {0} is not a positive even number")]
    OddLength(usize),
    #[error("low and high bands differ in length: {low} vs {high}")]
    LengthMismatch { low: usize, high: usize },
    #[error("{width}x{height} is not divisible by 2^{levels}")]
    Indivisible { width: usize, height: usize, levels: usize },
    #[error("decomposition depth {0} outside 1..={MAX_LEVELS}")]
    InvalidLevels(usize),
    #[error("band {band} at level {level} has shape {got:?}, expected {expected:?}")]
    ShapeMismatch {
        band: String,
        level: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("incompatible pyramids: {0}")]
    Incompatible(String),
}

pub type Result<T, E = WaveletError> = std::result::Result<T, E>;
