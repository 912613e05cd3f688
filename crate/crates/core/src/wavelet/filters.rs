//! Two-channel filter banks for the supported wavelet bases.
//!
//! Coefficients are the standard published values: Daubechies orthogonal
//! scaling filters from "Ten Lectures on Wavelets" (1992), Table 6.1, and
//! the Cohen-Daubechies-Feauveau spline biorthogonal pairs from the same
//! book, Tables 8.2-8.3, as tabulated to double precision by PyWavelets
//! (`pywt.Wavelet(name)`, filters `dec_lo`/`dec_hi` reversed and
//! `rec_lo`/`rec_hi`).
//!
//! Storage convention: analysis filters are applied by correlation,
//! `c[k] = sum_j a[j] x[2k + j - offset]`; synthesis filters are the
//! reconstruction vectors placed at the same positions,
//! `x[2k + j - offset] += s[j] c[k]`.

// the tables spell 1/sqrt(2) out to full precision
#![allow(clippy::approx_constant)]

use std::fmt;
use std::str::FromStr;

use super::WaveletError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Haar,
    Db3,
    Db4,
    Db10,
    Bior1_1,
    Bior1_3,
    Bior1_5,
    Bior2_4,
    Bior3_7,
    Bior4_4,
}

impl Basis {
    pub const ALL: [Basis; 10] = [
        Basis::Haar,
        Basis::Db3,
        Basis::Db4,
        Basis::Db10,
        Basis::Bior1_1,
        Basis::Bior1_3,
        Basis::Bior1_5,
        Basis::Bior2_4,
        Basis::Bior3_7,
        Basis::Bior4_4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Basis::Haar => "haar",
            Basis::Db3 => "db3",
            Basis::Db4 => "db4",
            Basis::Db10 => "db10",
            Basis::Bior1_1 => "bior1.1",
            Basis::Bior1_3 => "bior1.3",
            Basis::Bior1_5 => "bior1.5",
            Basis::Bior2_4 => "bior2.4",
            Basis::Bior3_7 => "bior3.7",
            Basis::Bior4_4 => "bior4.4",
        }
    }

    /// Haar and the Daubechies family; their synthesis filters are the
    /// analysis filters and the transform preserves energy.
    pub fn is_orthogonal(self) -> bool {
        matches!(self, Basis::Haar | Basis::Db3 | Basis::Db4 | Basis::Db10)
    }

    pub fn filters(self) -> FilterBank {
        FilterBank::new(self)
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Basis {
    type Err = WaveletError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Basis::ALL
            .into_iter()
            .find(|b| b.name() == lower)
            .ok_or_else(|| WaveletError::UnknownBasis(s.to_string()))
    }
}

/// How a finite signal is continued past its ends before filtering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Mirror extension. Half-sample (`x[-1] = x[0]`) for even-length
    /// filters, whole-sample (`x[-1] = x[1]`) for odd-length ones.
    Symmetric { whole_sample: bool },
    /// Wrap-around.
    Periodic,
}

/// Placement of one channel's coefficients for symmetric extension:
/// coefficient `k` sits at signal position `2k + shift`, and the channel's
/// extended sequence is even (`parity = 1.0`) or odd (`-1.0`) about each
/// mirror point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct ChannelSymmetry {
    pub shift: f64,
    pub parity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    basis: Basis,
    analysis_low: Vec<f64>,
    analysis_high: Vec<f64>,
    synthesis_low: Vec<f64>,
    synthesis_high: Vec<f64>,
    boundary: Boundary,
    offset: isize,
    low_symmetry: ChannelSymmetry,
    high_symmetry: ChannelSymmetry,
}

/// Looks up a basis by name (`"haar"`, `"db4"`, `"bior2.4"`, ...).
pub fn basis_filters(name: &str) -> Result<FilterBank, WaveletError> {
    Ok(name.parse::<Basis>()?.filters())
}

impl FilterBank {
    pub fn new(basis: Basis) -> Self {
        let (analysis_low, analysis_high, synthesis_low, synthesis_high) = match basis {
            Basis::Haar | Basis::Bior1_1 => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                (vec![r, r], vec![r, -r], vec![r, r], vec![r, -r])
            }
            Basis::Db3 => orthogonal(&DB3_LOW),
            Basis::Db4 => orthogonal(&DB4_LOW),
            Basis::Db10 => orthogonal(&DB10_LOW),
            Basis::Bior1_3 => biorthogonal(&BIOR1_3_DEC_LOW, &BIOR1_3_DEC_HIGH, &BIOR1_3_REC_LOW, &BIOR1_3_REC_HIGH),
            Basis::Bior1_5 => biorthogonal(&BIOR1_5_DEC_LOW, &BIOR1_5_DEC_HIGH, &BIOR1_5_REC_LOW, &BIOR1_5_REC_HIGH),
            Basis::Bior2_4 => biorthogonal(&BIOR2_4_DEC_LOW, &BIOR2_4_DEC_HIGH, &BIOR2_4_REC_LOW, &BIOR2_4_REC_HIGH),
            Basis::Bior3_7 => biorthogonal(&BIOR3_7_DEC_LOW, &BIOR3_7_DEC_HIGH, &BIOR3_7_REC_LOW, &BIOR3_7_REC_HIGH),
            Basis::Bior4_4 => biorthogonal(&BIOR4_4_DEC_LOW, &BIOR4_4_DEC_HIGH, &BIOR4_4_REC_LOW, &BIOR4_4_REC_HIGH),
        };

        let low_center = support_center(&analysis_low);
        let whole_sample = low_center.fract() == 0.0;
        // Low-pass coefficient k is centred on 2k + 1/2 (even-length
        // filters) or 2k (odd-length filters).
        let offset = if whole_sample {
            low_center as isize
        } else {
            (low_center - 0.5) as isize
        };
        let low_symmetry = ChannelSymmetry {
            shift: low_center - offset as f64,
            parity: symmetry_parity(&analysis_low),
        };
        let high_symmetry = ChannelSymmetry {
            shift: support_center(&analysis_high) - offset as f64,
            parity: symmetry_parity(&analysis_high),
        };
        // Mirror extension only keeps the transform invertible at critical
        // sampling for linear-phase filters; the Daubechies filters wrap.
        let boundary = if basis.is_orthogonal() && basis != Basis::Haar {
            Boundary::Periodic
        } else {
            Boundary::Symmetric { whole_sample }
        };

        FilterBank {
            basis,
            analysis_low,
            analysis_high,
            synthesis_low,
            synthesis_high,
            boundary,
            offset,
            low_symmetry,
            high_symmetry,
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn analysis_low(&self) -> &[f64] {
        &self.analysis_low
    }

    pub fn analysis_high(&self) -> &[f64] {
        &self.analysis_high
    }

    pub fn synthesis_low(&self) -> &[f64] {
        &self.synthesis_low
    }

    pub fn synthesis_high(&self) -> &[f64] {
        &self.synthesis_high
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub(crate) fn offset(&self) -> isize {
        self.offset
    }

    pub(crate) fn low_symmetry(&self) -> ChannelSymmetry {
        self.low_symmetry
    }

    pub(crate) fn high_symmetry(&self) -> ChannelSymmetry {
        self.high_symmetry
    }

    pub fn len(&self) -> usize {
        self.analysis_low.len()
    }

    pub fn is_empty(&self) -> bool {
        self.analysis_low.is_empty()
    }
}

/// Quadrature-mirror completion of an orthogonal scaling filter:
/// `g[n] = (-1)^n h[L-1-n]`, synthesis equal to analysis.
fn orthogonal(low: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let l = low.len();
    let high: Vec<f64> = (0..l)
        .map(|n| if n % 2 == 0 { low[l - 1 - n] } else { -low[l - 1 - n] })
        .collect();
    (low.to_vec(), high.clone(), low.to_vec(), high)
}

fn biorthogonal(
    dec_low: &[f64],
    dec_high: &[f64],
    rec_low: &[f64],
    rec_high: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    (dec_low.to_vec(), dec_high.to_vec(), rec_low.to_vec(), rec_high.to_vec())
}

/// Midpoint of the non-zero support.
fn support_center(f: &[f64]) -> f64 {
    let first = f.iter().position(|&v| v != 0.0).unwrap_or(0);
    let last = f.iter().rposition(|&v| v != 0.0).unwrap_or(0);
    (first + last) as f64 / 2.0
}

/// `1.0` if the filter is even about its support centre, `-1.0` if odd.
fn symmetry_parity(f: &[f64]) -> f64 {
    let c2 = (2.0 * support_center(f)) as isize;
    let even = (0..f.len() as isize)
        .filter(|&j| (0..f.len() as isize).contains(&(c2 - j)))
        .all(|j| (f[j as usize] - f[(c2 - j) as usize]).abs() < 1e-9);
    if even {
        1.0
    } else {
        -1.0
    }
}

// Daubechies scaling filters (orthogonal): only the low-pass is tabulated.
const DB3_LOW: [f64; 6] = [
    0.33267055295008263,
    0.8068915093110925,
    0.45987750211849154,
    -0.13501102001025458,
    -0.08544127388202666,
    0.03522629188570953,
];

const DB4_LOW: [f64; 8] = [
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
];

const DB10_LOW: [f64; 20] = [
    0.026670057900555554,
    0.1881768000776915,
    0.5272011889317256,
    0.6884590394536035,
    0.2811723436605775,
    -0.24984642432731538,
    -0.19594627437737705,
    0.12736934033579325,
    0.09305736460357235,
    -0.07139414716639708,
    -0.029457536821875813,
    0.033212674059341,
    0.0036065535669561697,
    -0.010733175483330575,
    0.001395351747052901,
    0.001992405295185056,
    -0.0006858566949597116,
    -0.00011646685512928545,
    9.358867032006959e-05,
    -1.3264202894521244e-05,
];

// Spline biorthogonal pairs.
const BIOR1_3_DEC_LOW: [f64; 6] = [
    -0.08838834764831845,
    0.08838834764831845,
    0.7071067811865476,
    0.7071067811865476,
    0.08838834764831845,
    -0.08838834764831845,
];

const BIOR1_3_DEC_HIGH: [f64; 6] = [0.0, -0.0, 0.7071067811865476, -0.7071067811865476, 0.0, -0.0];

const BIOR1_3_REC_LOW: [f64; 6] = [0.0, 0.0, 0.7071067811865476, 0.7071067811865476, 0.0, 0.0];

const BIOR1_3_REC_HIGH: [f64; 6] = [
    -0.08838834764831845,
    -0.08838834764831845,
    0.7071067811865476,
    -0.7071067811865476,
    0.08838834764831845,
    0.08838834764831845,
];

const BIOR1_5_DEC_LOW: [f64; 10] = [
    0.016572815184059706,
    -0.016572815184059706,
    -0.12153397801643785,
    0.12153397801643785,
    0.7071067811865476,
    0.7071067811865476,
    0.12153397801643785,
    -0.12153397801643785,
    -0.016572815184059706,
    0.016572815184059706,
];

const BIOR1_5_DEC_HIGH: [f64; 10] = [
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.7071067811865476,
    -0.7071067811865476,
    0.0,
    -0.0,
    0.0,
    -0.0,
];

const BIOR1_5_REC_LOW: [f64; 10] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.7071067811865476,
    0.7071067811865476,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR1_5_REC_HIGH: [f64; 10] = [
    0.016572815184059706,
    0.016572815184059706,
    -0.12153397801643785,
    -0.12153397801643785,
    0.7071067811865476,
    -0.7071067811865476,
    0.12153397801643785,
    0.12153397801643785,
    -0.016572815184059706,
    -0.016572815184059706,
];

const BIOR2_4_DEC_LOW: [f64; 10] = [
    0.03314563036811941,
    -0.06629126073623882,
    -0.1767766952966369,
    0.4198446513295126,
    0.9943689110435825,
    0.4198446513295126,
    -0.1767766952966369,
    -0.06629126073623882,
    0.03314563036811941,
    0.0,
];

const BIOR2_4_DEC_HIGH: [f64; 10] = [
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.3535533905932738,
    -0.7071067811865476,
    0.3535533905932738,
    -0.0,
    0.0,
    -0.0,
];

const BIOR2_4_REC_LOW: [f64; 10] = [
    0.0,
    0.0,
    0.0,
    0.3535533905932738,
    0.7071067811865476,
    0.3535533905932738,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR2_4_REC_HIGH: [f64; 10] = [
    0.0,
    -0.03314563036811941,
    -0.06629126073623882,
    0.1767766952966369,
    0.4198446513295126,
    -0.9943689110435825,
    0.4198446513295126,
    0.1767766952966369,
    -0.06629126073623882,
    -0.03314563036811941,
];

const BIOR3_7_DEC_LOW: [f64; 16] = [
    0.0030210861012608843,
    -0.009063258303782653,
    -0.01683176542131064,
    0.074663985074019,
    0.03133297870736289,
    -0.301159125922835,
    -0.02649924094534547,
    0.9516421218971786,
    0.9516421218971786,
    -0.02649924094534547,
    -0.301159125922835,
    0.03133297870736289,
    0.074663985074019,
    -0.01683176542131064,
    -0.009063258303782653,
    0.0030210861012608843,
];

const BIOR3_7_DEC_HIGH: [f64; 16] = [
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.1767766952966369,
    -0.5303300858899106,
    0.5303300858899106,
    -0.1767766952966369,
    0.0,
    -0.0,
    0.0,
    -0.0,
    0.0,
    -0.0,
];

const BIOR3_7_REC_LOW: [f64; 16] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.1767766952966369,
    0.5303300858899106,
    0.5303300858899106,
    0.1767766952966369,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR3_7_REC_HIGH: [f64; 16] = [
    0.0030210861012608843,
    0.009063258303782653,
    -0.01683176542131064,
    -0.074663985074019,
    0.03133297870736289,
    0.301159125922835,
    -0.02649924094534547,
    -0.9516421218971786,
    0.9516421218971786,
    0.02649924094534547,
    -0.301159125922835,
    -0.03133297870736289,
    0.074663985074019,
    0.01683176542131064,
    -0.009063258303782653,
    -0.0030210861012608843,
];

const BIOR4_4_DEC_LOW: [f64; 10] = [
    0.03782845550726404,
    -0.023849465019556843,
    -0.11062440441843718,
    0.37740285561283066,
    0.8526986790088938,
    0.37740285561283066,
    -0.11062440441843718,
    -0.023849465019556843,
    0.03782845550726404,
    0.0,
];

const BIOR4_4_DEC_HIGH: [f64; 10] = [
    0.0,
    -0.0,
    -0.06453888262869706,
    0.04068941760916406,
    0.41809227322161724,
    -0.7884856164055829,
    0.41809227322161724,
    0.04068941760916406,
    -0.06453888262869706,
    -0.0,
];

const BIOR4_4_REC_LOW: [f64; 10] = [
    0.0,
    -0.06453888262869706,
    -0.04068941760916406,
    0.41809227322161724,
    0.7884856164055829,
    0.41809227322161724,
    -0.04068941760916406,
    -0.06453888262869706,
    0.0,
    0.0,
];

const BIOR4_4_REC_HIGH: [f64; 10] = [
    0.0,
    -0.03782845550726404,
    -0.023849465019556843,
    0.11062440441843718,
    0.37740285561283066,
    -0.8526986790088938,
    0.37740285561283066,
    0.11062440441843718,
    -0.023849465019556843,
    -0.03782845550726404,
];

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn haar_coefficients() {
        let fb = basis_filters("haar").unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(fb.analysis_low(), &[r, r]);
        assert_eq!(fb.analysis_high(), &[r, -r]);
    }

    #[test]
    fn unknown_bases_rejected() {
        for name in ["mayer", "meyer", "dmey", "db2", ""] {
            assert!(matches!(basis_filters(name), Err(WaveletError::UnknownBasis(_))));
        }
    }

    #[test]
    fn names_round_trip() {
        for b in Basis::ALL {
            assert_eq!(b.name().parse::<Basis>().unwrap(), b);
        }
        assert_eq!("Bior4.4".parse::<Basis>().unwrap(), Basis::Bior4_4);
    }

    #[test]
    fn db3_is_six_tap_with_unit_dc_gain() {
        let fb = Basis::Db3.filters();
        assert_eq!(fb.len(), 6);
        let sum: f64 = fb.analysis_low().iter().sum();
        let alt: f64 = fb
            .analysis_low()
            .iter()
            .enumerate()
            .map(|(n, h)| if n % 2 == 0 { *h } else { -*h })
            .sum();
        assert!((sum - SQRT_2).abs() < 1e-12);
        assert!(alt.abs() < 1e-12);
    }

    #[test]
    fn every_low_pass_sums_to_sqrt_2_and_high_pass_to_zero() {
        for b in Basis::ALL {
            let fb = b.filters();
            let lo: f64 = fb.analysis_low().iter().sum();
            let hi: f64 = fb.analysis_high().iter().sum();
            assert!((lo - SQRT_2).abs() < 1e-9, "{b}: {lo}");
            assert!(hi.abs() < 1e-9, "{b}: {hi}");
            let slo: f64 = fb.synthesis_low().iter().sum();
            assert!((slo - SQRT_2).abs() < 1e-9, "{b}: {slo}");
        }
    }

    #[test]
    fn orthogonal_filters_are_orthonormal_under_even_shifts() {
        for b in Basis::ALL.into_iter().filter(|b| b.is_orthogonal()) {
            let fb = b.filters();
            let h = fb.analysis_low();
            assert_eq!(fb.synthesis_low(), h);
            for shift in (0..h.len()).step_by(2) {
                let dot: f64 = (shift..h.len()).map(|i| h[i] * h[i - shift]).sum();
                let expected = if shift == 0 { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10, "{b} shift {shift}: {dot}");
            }
        }
    }

    #[test]
    fn biorthogonal_pairs_are_linear_phase() {
        for b in Basis::ALL.into_iter().filter(|b| !b.is_orthogonal()) {
            let fb = b.filters();
            assert!(matches!(fb.boundary(), Boundary::Symmetric { .. }), "{b}");
            assert_eq!(fb.low_symmetry().parity, 1.0, "{b}");
        }
        assert_eq!(Basis::Db4.filters().boundary(), Boundary::Periodic);
    }
}
