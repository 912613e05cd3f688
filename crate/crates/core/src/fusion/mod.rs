//! Pixel-level fusion of two registered images in the wavelet domain, and
//! pairwise accumulation of images along an agent itinerary.

mod decision;

pub use decision::{combine, consistency_verify, decision_map, DecisionMap, Source};

use std::fmt;
use std::str::FromStr;

use crate::imagecore::{requantize, BitDepth, Image, ImageError};
use crate::wavelet::{dwt2, idwt2, Basis, WaveletError};

#[derive(Debug, thiserror::Error)]
pub enum FusionError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error("invalid fusion profile: {0}")]
    InvalidProfile(String),
    #[error("unknown {what} {value:?}")]
    UnknownName { what: &'static str, value: String },
}

pub type Result<T, E = FusionError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResolutionClass {
    Low,
    High,
}

impl fmt::Display for ResolutionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResolutionClass::Low => "low",
            ResolutionClass::High => "high",
        })
    }
}

/// How an itinerary folds the next node's image into the carried one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FusionMode {
    #[default]
    Wavelet,
    /// `running + ρ·next`, clamped.
    Additive,
}

impl fmt::Display for FusionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FusionMode::Wavelet => "WAVELET",
            FusionMode::Additive => "ADDITIVE",
        })
    }
}

impl FromStr for FusionMode {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "WAVELET" => Ok(FusionMode::Wavelet),
            "ADDITIVE" => Ok(FusionMode::Additive),
            _ => Err(FusionError::UnknownName {
                what: "fusion mode",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FusionProfile {
    pub resolution: ResolutionClass,
    pub basis: Basis,
    pub levels: usize,
    pub output_bit_depth: BitDepth,
    /// Odd side length of the activity window.
    pub window: usize,
    /// ρ, the weight of each accumulated image in additive mode.
    pub fusion_factor: f64,
    pub mode: FusionMode,
}

impl FusionProfile {
    pub fn low_resolution() -> Self {
        FusionProfile {
            resolution: ResolutionClass::Low,
            basis: Basis::Haar,
            levels: 1,
            output_bit_depth: BitDepth::Eight,
            window: 3,
            fusion_factor: 1.0,
            mode: FusionMode::Wavelet,
        }
    }

    pub fn high_resolution() -> Self {
        FusionProfile {
            resolution: ResolutionClass::High,
            basis: Basis::Db4,
            levels: 3,
            output_bit_depth: BitDepth::Sixteen,
            window: 3,
            fusion_factor: 1.0,
            mode: FusionMode::Wavelet,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(FusionError::InvalidProfile(format!(
                "window {} must be odd and at least 1",
                self.window
            )));
        }
        if self.levels == 0 || self.levels > crate::wavelet::MAX_LEVELS {
            return Err(FusionError::InvalidProfile(format!(
                "levels {} outside 1..={}",
                self.levels,
                crate::wavelet::MAX_LEVELS
            )));
        }
        if !self.fusion_factor.is_finite() || self.fusion_factor < 0.0 {
            return Err(FusionError::InvalidProfile(format!(
                "fusion factor {} must be finite and non-negative",
                self.fusion_factor
            )));
        }
        Ok(())
    }
}

/// Fuses two registered images of equal size and depth.
pub fn fuse_pair(a: &Image, b: &Image, profile: &FusionProfile) -> Result<Image> {
    profile.validate()?;
    a.same_shape_and_depth(b)?;
    let pa = dwt2(a, profile.basis, profile.levels)?;
    let pb = dwt2(b, profile.basis, profile.levels)?;
    let map = consistency_verify(&decision_map(&pa, &pb, profile.window)?);
    let fused = idwt2(&combine(&pa, &pb, &map)?)?;
    Ok(requantize(&fused, profile.output_bit_depth))
}

/// Folds `next` into `running`. The result keeps `running`'s depth in
/// additive mode and takes the profile's output depth in wavelet mode.
pub fn accumulate_fuse(running: &Image, next: &Image, profile: &FusionProfile) -> Result<Image> {
    running.same_shape(next)?;
    let next = requantize(next, running.depth());
    match profile.mode {
        FusionMode::Wavelet => fuse_pair(running, &next, profile),
        FusionMode::Additive => {
            profile.validate()?;
            let max = f64::from(running.depth().max_value());
            let rho = profile.fusion_factor;
            let pixels = running
                .pixels()
                .iter()
                .zip(next.pixels())
                .map(|(&r, &n)| (f64::from(r) + (rho * f64::from(n)).round()).clamp(0.0, max) as u32)
                .collect();
            Ok(Image::new(running.width(), running.height(), running.depth(), pixels)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::error_measure;
    use crate::imagecore::synth::{random_scene, split_blur_pair};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn profile(basis: Basis, levels: usize) -> FusionProfile {
        FusionProfile {
            basis,
            levels,
            ..FusionProfile::low_resolution()
        }
    }

    fn noise(rng: &mut ChaCha8Rng, w: usize, h: usize, max: u32) -> Image {
        Image::from_fn(w, h, BitDepth::Eight, |_, _| rng.gen_range(0..=max)).unwrap()
    }

    #[test]
    fn self_fusion_is_near_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = noise(&mut rng, 32, 32, 255);
        for basis in Basis::ALL {
            let f = fuse_pair(&x, &x, &profile(basis, 2)).unwrap();
            let worst = x
                .pixels()
                .iter()
                .zip(f.pixels())
                .map(|(&a, &b)| a.abs_diff(b))
                .max()
                .unwrap();
            assert!(worst <= 1, "{basis}: {worst}");
        }
    }

    #[test]
    fn indivisible_size_rejected() {
        let x = Image::filled(30, 30, BitDepth::Eight, 9).unwrap();
        assert!(matches!(
            fuse_pair(&x, &x, &profile(Basis::Haar, 3)),
            Err(FusionError::Wavelet(WaveletError::Indivisible { .. }))
        ));
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let a = Image::filled(8, 8, BitDepth::Eight, 9).unwrap();
        let b = Image::filled(8, 16, BitDepth::Eight, 9).unwrap();
        assert!(matches!(
            fuse_pair(&a, &b, &profile(Basis::Haar, 1)),
            Err(FusionError::Image(ImageError::DimensionMismatch { .. }))
        ));
        let c = Image::filled(8, 8, BitDepth::Twelve, 9).unwrap();
        assert!(fuse_pair(&a, &c, &profile(Basis::Haar, 1)).is_err());
    }

    #[test]
    fn even_window_rejected() {
        let a = Image::filled(8, 8, BitDepth::Eight, 9).unwrap();
        let p = FusionProfile {
            window: 4,
            ..FusionProfile::low_resolution()
        };
        assert!(matches!(fuse_pair(&a, &a, &p), Err(FusionError::InvalidProfile(_))));
    }

    #[test]
    fn split_blur_fusion_beats_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let truth = random_scene(64, 64, BitDepth::Eight, 255, &mut rng);
        let (a, b) = split_blur_pair(&truth, 2.0);
        let fused = fuse_pair(&a, &b, &profile(Basis::Db4, 3)).unwrap();
        let ea = error_measure(&truth, &a).unwrap().std_of_difference;
        let eb = error_measure(&truth, &b).unwrap().std_of_difference;
        let ef = error_measure(&truth, &fused).unwrap().std_of_difference;
        assert!(ef <= ea.min(eb), "fused {ef} vs {ea} / {eb}");
    }

    #[test]
    fn high_profile_widens_output_depth() {
        let a = Image::filled(16, 16, BitDepth::Eight, 200).unwrap();
        let f = fuse_pair(&a, &a, &FusionProfile::high_resolution()).unwrap();
        assert_eq!(f.depth(), BitDepth::Sixteen);
        assert!(f.pixels().iter().all(|&v| (v >> 8).abs_diff(200) <= 1));
    }

    #[test]
    fn additive_zero_factor_keeps_running() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = noise(&mut rng, 8, 8, 255);
        let n = noise(&mut rng, 8, 8, 255);
        let p = FusionProfile {
            mode: FusionMode::Additive,
            fusion_factor: 0.0,
            ..FusionProfile::low_resolution()
        };
        assert_eq!(accumulate_fuse(&r, &n, &p).unwrap(), r);
    }

    #[test]
    fn additive_unit_factor_onto_zero_copies_next() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let zero = Image::filled(8, 8, BitDepth::Eight, 0).unwrap();
        let n = noise(&mut rng, 8, 8, 255);
        let p = FusionProfile {
            mode: FusionMode::Additive,
            ..FusionProfile::low_resolution()
        };
        assert_eq!(accumulate_fuse(&zero, &n, &p).unwrap(), n);
    }

    #[test]
    fn additive_clamps() {
        let a = Image::filled(4, 4, BitDepth::Eight, 200).unwrap();
        let p = FusionProfile {
            mode: FusionMode::Additive,
            ..FusionProfile::low_resolution()
        };
        let out = accumulate_fuse(&a, &a, &p).unwrap();
        assert!(out.pixels().iter().all(|&v| v == 255));
    }

    #[test]
    fn wavelet_accumulation_of_identical_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = noise(&mut rng, 16, 16, 255);
        let out = accumulate_fuse(&r, &r, &FusionProfile::low_resolution()).unwrap();
        assert!(r.pixels().iter().zip(out.pixels()).all(|(&a, &b)| a.abs_diff(b) <= 1));
    }

    #[test]
    fn mode_names_parse() {
        assert_eq!("additive".parse::<FusionMode>().unwrap(), FusionMode::Additive);
        assert_eq!("WAVELET".parse::<FusionMode>().unwrap(), FusionMode::Wavelet);
        assert!("sum".parse::<FusionMode>().is_err());
    }
}
