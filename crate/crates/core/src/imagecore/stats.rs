use std::collections::BTreeMap;

use super::{BitDepth, Image, Result};

/// Gray-level occurrence counts.
///
/// Depths up to 16 bits use a dense table of `2^bits` bins; 24-bit images
/// fall back to a sparse map keyed by level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    bins: Bins,
    total: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Bins {
    Dense(Vec<u64>),
    Sparse(BTreeMap<u32, u64>),
}

impl Histogram {
    pub fn of(image: &Image) -> Self {
        let bins = if image.depth() == BitDepth::TwentyFour {
            let mut map = BTreeMap::new();
            for &p in image.pixels() {
                *map.entry(p).or_insert(0) += 1;
            }
            Bins::Sparse(map)
        } else {
            let mut counts = vec![0u64; 1 << image.depth().bits()];
            for &p in image.pixels() {
                counts[p as usize] += 1;
            }
            Bins::Dense(counts)
        };
        Histogram {
            bins,
            total: image.len() as u64,
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, level: u32) -> u64 {
        match &self.bins {
            Bins::Dense(v) => v.get(level as usize).copied().unwrap_or(0),
            Bins::Sparse(m) => m.get(&level).copied().unwrap_or(0),
        }
    }

    /// Non-zero `(level, count)` pairs in increasing level order.
    pub fn occupied(&self) -> Box<dyn Iterator<Item = (u32, u64)> + '_> {
        match &self.bins {
            Bins::Dense(v) => Box::new(
                v.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(l, &c)| (l as u32, c)),
            ),
            Bins::Sparse(m) => Box::new(m.iter().map(|(&l, &c)| (l, c))),
        }
    }

    /// Shannon entropy in bits; empty bins contribute nothing.
    pub fn entropy(&self) -> f64 {
        let total = self.total as f64;
        let h: f64 = self
            .occupied()
            .map(|(_, c)| {
                let p = c as f64 / total;
                p * p.log2()
            })
            .sum();
        // a single occupied level yields -0.0
        if h == 0.0 {
            0.0
        } else {
            -h
        }
    }
}

pub fn entropy(image: &Image) -> f64 {
    Histogram::of(image).entropy()
}

/// Pixel-wise `|present - previous|`.
pub fn difference(present: &Image, previous: &Image) -> Result<Image> {
    present.same_shape_and_depth(previous)?;
    let pixels = present
        .pixels()
        .iter()
        .zip(previous.pixels())
        .map(|(&a, &b)| a.abs_diff(b))
        .collect();
    Image::new(present.width(), present.height(), present.depth(), pixels)
}

/// Entropy of the difference image: how much the scene changed between two
/// captures, in bits.
pub fn signal_strength(present: &Image, previous: &Image) -> Result<f64> {
    Ok(entropy(&difference(present, previous)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorStats {
    /// Population standard deviation of `candidate - ideal`.
    pub std_of_difference: f64,
    /// Mean of `(candidate - ideal)^2`.
    pub mean_squared_error: f64,
}

pub fn error_measure(ideal: &Image, candidate: &Image) -> Result<ErrorStats> {
    ideal.same_shape(candidate)?;
    let n = ideal.len() as f64;
    let diffs = ideal
        .pixels()
        .iter()
        .zip(candidate.pixels())
        .map(|(&a, &b)| f64::from(b) - f64::from(a));
    let (sum, sum_sq) = diffs.fold((0.0, 0.0), |(s, q), d| (s + d, q + d * d));
    let mean = sum / n;
    let mse = sum_sq / n;
    let variance = ideal
        .pixels()
        .iter()
        .zip(candidate.pixels())
        .map(|(&a, &b)| {
            let d = f64::from(b) - f64::from(a) - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    Ok(ErrorStats {
        std_of_difference: variance.sqrt(),
        mean_squared_error: mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::ImageError;

    fn img8(w: usize, h: usize, px: Vec<u32>) -> Image {
        Image::new(w, h, BitDepth::Eight, px).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&Image::filled(3, 3, BitDepth::Eight, 77).unwrap()), 0.0);
        assert_eq!(entropy(&img8(2, 2, vec![0, 0, 255, 255])), 1.0);
        let all_levels = img8(16, 16, (0..256).collect());
        assert!((entropy(&all_levels) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_24_bit_uses_sparse_bins() {
        let img = Image::new(2, 2, BitDepth::TwentyFour, vec![0, 0xFF_FFFF, 5, 6]).unwrap();
        assert!((entropy(&img) - 2.0).abs() < 1e-12);
        let h = Histogram::of(&img);
        assert_eq!(h.count(0xFF_FFFF), 1);
        assert_eq!(h.occupied().count(), 4);
    }

    #[test]
    fn difference_examples() {
        let a = img8(2, 2, vec![10, 200, 0, 0]);
        let b = img8(2, 2, vec![30, 50, 0, 0]);
        assert_eq!(difference(&a, &b).unwrap().pixels(), &[20, 150, 0, 0]);
        assert!(difference(&a, &a).unwrap().pixels().iter().all(|&p| p == 0));
        let c = img8(2, 3, vec![0; 6]);
        assert!(matches!(difference(&a, &c), Err(ImageError::DimensionMismatch { .. })));
    }

    #[test]
    fn signal_strength_examples() {
        let base = img8(4, 4, vec![9; 16]);
        assert_eq!(signal_strength(&base, &base).unwrap(), 0.0);
        let mut px = vec![9; 16];
        px[5] = 200;
        let changed = img8(4, 4, px);
        let expected = -(15.0f64 / 16.0) * (15.0f64 / 16.0).log2() - (1.0 / 16.0) * (1.0f64 / 16.0).log2();
        assert!((signal_strength(&changed, &base).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.337).abs() < 1e-3);

        // difference uniform over four values
        let prev = img8(2, 2, vec![0; 4]);
        let pres = img8(2, 2, vec![0, 1, 2, 3]);
        assert_eq!(signal_strength(&pres, &prev).unwrap(), 2.0);
    }

    #[test]
    fn error_measure_examples() {
        let a = img8(2, 2, vec![3, 4, 5, 6]);
        let e = error_measure(&a, &a).unwrap();
        assert_eq!((e.std_of_difference, e.mean_squared_error), (0.0, 0.0));

        let zeros = img8(2, 2, vec![0; 4]);
        let fives = img8(2, 2, vec![5; 4]);
        let e = error_measure(&zeros, &fives).unwrap();
        assert_eq!((e.std_of_difference, e.mean_squared_error), (0.0, 25.0));

        let ideal = img8(2, 2, vec![0, 0, 0, 0]);
        let cand = img8(2, 2, vec![0, 10, 0, 10]);
        let e = error_measure(&ideal, &cand).unwrap();
        assert!((e.std_of_difference - 5.0).abs() < 1e-12);
        assert!((e.mean_squared_error - 50.0).abs() < 1e-12);
    }
}
