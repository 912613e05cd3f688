use ndarray::{Array2, Axis};

use super::filters::{Basis, FilterBank};
use super::transform::{analysis_step_1d, synthesis_step_1d};
use super::{Result, WaveletError, MAX_LEVELS};
use crate::imagecore::{BitDepth, Image};

/// Detail subbands of one decomposition level.
#[derive(Clone, Debug, PartialEq)]
pub struct DetailBands {
    /// LH: low-pass along rows, high-pass along columns.
    pub horizontal: Array2<f64>,
    /// HL: high-pass along rows, low-pass along columns.
    pub vertical: Array2<f64>,
    /// HH: high-pass in both directions.
    pub diagonal: Array2<f64>,
}

impl DetailBands {
    pub fn bands(&self) -> [&Array2<f64>; 3] {
        [&self.horizontal, &self.vertical, &self.diagonal]
    }

    pub fn bands_mut(&mut self) -> [&mut Array2<f64>; 3] {
        [&mut self.horizontal, &mut self.vertical, &mut self.diagonal]
    }
}

pub const BAND_NAMES: [&str; 3] = ["LH", "HL", "HH"];

/// Multi-level 2-D wavelet decomposition.
///
/// `details[0]` is level 1 (finest); `approximation` is LL at the coarsest
/// level. Arrays are indexed `[row, column]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandPyramid {
    pub basis: Basis,
    pub approximation: Array2<f64>,
    pub details: Vec<DetailBands>,
    pub original_width: usize,
    pub original_height: usize,
    pub bit_depth: BitDepth,
}

impl SubbandPyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// `(rows, cols)` of every band at `level` (1-based).
    pub fn shape_at(&self, level: usize) -> (usize, usize) {
        (self.original_height >> level, self.original_width >> level)
    }

    /// Checks every band against the shape implied by the original size.
    pub fn validate(&self) -> Result<()> {
        let levels = self.levels();
        if levels == 0 || levels > MAX_LEVELS {
            return Err(WaveletError::InvalidLevels(levels));
        }
        check_divisible(self.original_width, self.original_height, levels)?;
        let check = |band: &str, level: usize, a: &Array2<f64>| {
            let expected = self.shape_at(level);
            if a.dim() != expected {
                return Err(WaveletError::ShapeMismatch {
                    band: band.to_string(),
                    level,
                    expected,
                    got: a.dim(),
                });
            }
            Ok(())
        };
        for (i, d) in self.details.iter().enumerate() {
            for (name, band) in BAND_NAMES.iter().zip(d.bands()) {
                check(name, i + 1, band)?;
            }
        }
        check("LL", levels, &self.approximation)
    }

    /// Errors unless `other` has the same basis, depth and band layout.
    pub fn check_compatible(&self, other: &SubbandPyramid) -> Result<()> {
        if self.basis != other.basis {
            return Err(WaveletError::Incompatible(format!(
                "basis {} vs {}",
                self.basis, other.basis
            )));
        }
        if self.levels() != other.levels()
            || self.original_width != other.original_width
            || self.original_height != other.original_height
        {
            return Err(WaveletError::Incompatible(format!(
                "layout {}x{}/{} vs {}x{}/{}",
                self.original_width,
                self.original_height,
                self.levels(),
                other.original_width,
                other.original_height,
                other.levels()
            )));
        }
        self.validate()?;
        other.validate()
    }

    /// Every coefficient, approximation band first.
    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.approximation.iter().copied().chain(
            self.details
                .iter()
                .flat_map(|d| d.bands().into_iter().flat_map(|b| b.iter().copied())),
        )
    }
}

fn check_divisible(width: usize, height: usize, levels: usize) -> Result<()> {
    let block = 1usize << levels;
    if !width.is_multiple_of(block) || !height.is_multiple_of(block) || width < block || height < block {
        return Err(WaveletError::Indivisible { width, height, levels });
    }
    Ok(())
}

/// Forward transform of an image: rows first, then columns, recursing on LL.
pub fn dwt2(image: &Image, basis: Basis, levels: usize) -> Result<SubbandPyramid> {
    let data = Array2::from_shape_vec((image.height(), image.width()), image.to_reals())
        .expect("image buffer is row-major width*height");
    dwt2_real(&data, basis, levels, image.depth())
}

/// Forward transform of a real-valued array (`[row, column]`).
pub fn dwt2_real(data: &Array2<f64>, basis: Basis, levels: usize, bit_depth: BitDepth) -> Result<SubbandPyramid> {
    if levels == 0 || levels > MAX_LEVELS {
        return Err(WaveletError::InvalidLevels(levels));
    }
    let (rows, cols) = data.dim();
    check_divisible(cols, rows, levels)?;
    let bank = basis.filters();
    let mut approximation = data.clone();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (ll, d) = analyze_level(&approximation, &bank)?;
        approximation = ll;
        details.push(d);
    }
    Ok(SubbandPyramid {
        basis,
        approximation,
        details,
        original_width: cols,
        original_height: rows,
        bit_depth,
    })
}

/// Inverse transform, rounded to the nearest integer and clamped into the
/// pyramid's bit depth.
pub fn idwt2(pyramid: &SubbandPyramid) -> Result<Image> {
    let real = idwt2_real(pyramid)?;
    let (rows, cols) = real.dim();
    Ok(Image::from_reals(cols, rows, pyramid.bit_depth, real.iter().copied()).expect("pyramid shape validated"))
}

/// Inverse transform without rounding.
pub fn idwt2_real(pyramid: &SubbandPyramid) -> Result<Array2<f64>> {
    pyramid.validate()?;
    let bank = pyramid.basis.filters();
    let mut current = pyramid.approximation.clone();
    for d in pyramid.details.iter().rev() {
        current = synthesize_level(&current, d, &bank)?;
    }
    Ok(current)
}

fn split_lanes(data: &Array2<f64>, axis: Axis, bank: &FilterBank) -> Result<(Array2<f64>, Array2<f64>)> {
    let (rows, cols) = data.dim();
    let (low_dim, lanes) = match axis {
        Axis(1) => ((rows, cols / 2), rows),
        _ => ((rows / 2, cols), cols),
    };
    let mut low = Array2::zeros(low_dim);
    let mut high = Array2::zeros(low_dim);
    for i in 0..lanes {
        let lane: Vec<f64> = match axis {
            Axis(1) => data.row(i).to_vec(),
            _ => data.column(i).to_vec(),
        };
        let (lo, hi) = analysis_step_1d(&lane, bank)?;
        let (mut lo_dst, mut hi_dst) = match axis {
            Axis(1) => (low.row_mut(i), high.row_mut(i)),
            _ => (low.column_mut(i), high.column_mut(i)),
        };
        lo_dst.iter_mut().zip(lo).for_each(|(d, v)| *d = v);
        hi_dst.iter_mut().zip(hi).for_each(|(d, v)| *d = v);
    }
    Ok((low, high))
}

fn merge_lanes(low: &Array2<f64>, high: &Array2<f64>, axis: Axis, bank: &FilterBank) -> Result<Array2<f64>> {
    let (rows, cols) = low.dim();
    let (out_dim, lanes) = match axis {
        Axis(1) => ((rows, cols * 2), rows),
        _ => ((rows * 2, cols), cols),
    };
    let mut out = Array2::zeros(out_dim);
    for i in 0..lanes {
        let (lo, hi) = match axis {
            Axis(1) => (low.row(i).to_vec(), high.row(i).to_vec()),
            _ => (low.column(i).to_vec(), high.column(i).to_vec()),
        };
        let merged = synthesis_step_1d(&lo, &hi, bank)?;
        let dst = match axis {
            Axis(1) => out.row_mut(i),
            _ => out.column_mut(i),
        };
        dst.into_iter().zip(merged).for_each(|(d, v)| *d = v);
    }
    Ok(out)
}

fn analyze_level(data: &Array2<f64>, bank: &FilterBank) -> Result<(Array2<f64>, DetailBands)> {
    let (row_low, row_high) = split_lanes(data, Axis(1), bank)?;
    let (ll, lh) = split_lanes(&row_low, Axis(0), bank)?;
    let (hl, hh) = split_lanes(&row_high, Axis(0), bank)?;
    Ok((
        ll,
        DetailBands {
            horizontal: lh,
            vertical: hl,
            diagonal: hh,
        },
    ))
}

fn synthesize_level(ll: &Array2<f64>, details: &DetailBands, bank: &FilterBank) -> Result<Array2<f64>> {
    let row_low = merge_lanes(ll, &details.horizontal, Axis(0), bank)?;
    let row_high = merge_lanes(&details.vertical, &details.diagonal, Axis(0), bank)?;
    merge_lanes(&row_low, &row_high, Axis(1), bank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_array(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn constant_image_haar_one_level() {
        let img = Image::filled(4, 4, BitDepth::Eight, 21).unwrap();
        let p = dwt2(&img, Basis::Haar, 1).unwrap();
        assert!(p.approximation.iter().all(|&v| (v - 42.0).abs() < 1e-12));
        for band in p.details[0].bands() {
            assert!(band.iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn two_by_two_haar_approximation() {
        let (a, b, c, d) = (10u32, 20, 30, 70);
        let img = Image::new(2, 2, BitDepth::Eight, vec![a, b, c, d]).unwrap();
        let p = dwt2(&img, Basis::Haar, 1).unwrap();
        let expected = f64::from(a + b + c + d) / 2.0;
        assert!((p.approximation[[0, 0]] - expected).abs() < 1e-12);
        // vertical detail (row high-pass) of [[a,b],[c,d]] is ((a-b)+(c-d))/2
        let hl = f64::from(a + c) - f64::from(b + d);
        assert!((p.details[0].vertical[[0, 0]] - hl / 2.0).abs() < 1e-12);
    }

    #[test]
    fn indivisible_dimensions_rejected() {
        let img = Image::filled(6, 6, BitDepth::Eight, 0).unwrap();
        assert!(matches!(
            dwt2(&img, Basis::Haar, 2),
            Err(WaveletError::Indivisible { levels: 2, .. })
        ));
        assert!(matches!(
            dwt2(&img, Basis::Haar, 0),
            Err(WaveletError::InvalidLevels(0))
        ));
        let big = Image::filled(64, 64, BitDepth::Eight, 0).unwrap();
        assert!(matches!(
            dwt2(&big, Basis::Haar, 6),
            Err(WaveletError::InvalidLevels(6))
        ));
    }

    #[test]
    fn zero_pyramid_reconstructs_zero_image() {
        let img = Image::filled(8, 8, BitDepth::Eight, 0).unwrap();
        let p = dwt2(&img, Basis::Db4, 2).unwrap();
        assert!(idwt2(&p).unwrap().pixels().iter().all(|&v| v == 0));
    }

    #[test]
    fn wrong_band_shape_rejected() {
        let img = Image::filled(8, 8, BitDepth::Eight, 3).unwrap();
        let mut p = dwt2(&img, Basis::Haar, 1).unwrap();
        p.details[0].horizontal = Array2::zeros((3, 4));
        assert!(matches!(idwt2(&p), Err(WaveletError::ShapeMismatch { level: 1, .. })));
    }

    #[test]
    fn band_shapes_halve_per_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = random_array(&mut rng, 32, 64);
        let p = dwt2_real(&data, Basis::Bior3_7, 3, BitDepth::Eight).unwrap();
        assert_eq!(p.details[0].horizontal.dim(), (16, 32));
        assert_eq!(p.details[2].diagonal.dim(), (4, 8));
        assert_eq!(p.approximation.dim(), (4, 8));
    }

    #[test]
    fn separable_composition_matches_1d_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data = random_array(&mut rng, 8, 8);
        for basis in [Basis::Haar, Basis::Db3, Basis::Bior2_4] {
            let bank = basis.filters();
            let p = dwt2_real(&data, basis, 1, BitDepth::Eight).unwrap();
            // rows
            let mut lo_rows = vec![vec![0.0; 4]; 8];
            let mut hi_rows = vec![vec![0.0; 4]; 8];
            for r in 0..8 {
                let (lo, hi) = analysis_step_1d(&data.row(r).to_vec(), &bank).unwrap();
                lo_rows[r] = lo;
                hi_rows[r] = hi;
            }
            // columns
            for c in 0..4 {
                let lo_col: Vec<f64> = (0..8).map(|r| lo_rows[r][c]).collect();
                let hi_col: Vec<f64> = (0..8).map(|r| hi_rows[r][c]).collect();
                let (ll, lh) = analysis_step_1d(&lo_col, &bank).unwrap();
                let (hl, hh) = analysis_step_1d(&hi_col, &bank).unwrap();
                for r in 0..4 {
                    assert!((p.approximation[[r, c]] - ll[r]).abs() < 1e-12);
                    assert!((p.details[0].horizontal[[r, c]] - lh[r]).abs() < 1e-12);
                    assert!((p.details[0].vertical[[r, c]] - hl[r]).abs() < 1e-12);
                    assert!((p.details[0].diagonal[[r, c]] - hh[r]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn haar_integer_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let img = Image::from_fn(16, 16, BitDepth::Eight, |_, _| rng.gen_range(0..256)).unwrap();
            let p = dwt2(&img, Basis::Haar, 2).unwrap();
            assert_eq!(idwt2(&p).unwrap(), img);
        }
    }

    #[test]
    fn constant_shift_only_moves_approximation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let data = random_array(&mut rng, 16, 16);
        let shifted = data.mapv(|v| v + 7.25);
        for basis in Basis::ALL {
            let a = dwt2_real(&data, basis, 2, BitDepth::Eight).unwrap();
            let b = dwt2_real(&shifted, basis, 2, BitDepth::Eight).unwrap();
            for (da, db) in a.details.iter().zip(&b.details) {
                for (x, y) in da.bands().into_iter().zip(db.bands()) {
                    let err = (x - y).iter().map(|v| v.abs()).fold(0.0, f64::max);
                    assert!(err < 1e-8, "{basis}: {err}");
                }
            }
        }
    }
}
