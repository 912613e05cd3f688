//! One level of the two-channel filter bank on a 1-D signal.
//!
//! Both boundary modes reduce to circular filtering: periodic mode wraps
//! the signal itself, symmetric mode wraps its mirror extension (period
//! `2n` for half-sample, `2n - 2` for whole-sample symmetry) and keeps the
//! `n/2` coefficients per channel that the extension's symmetry does not
//! already determine. Synthesis regenerates the rest from that symmetry.

use super::filters::{Boundary, ChannelSymmetry, FilterBank};
use super::{Result, WaveletError};

/// Splits an even-length signal into `n/2` approximation and `n/2` detail
/// coefficients.
pub fn analysis_step_1d(signal: &[f64], bank: &FilterBank) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = signal.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(WaveletError::OddLength(n));
    }
    let extended = extend(signal, bank.boundary());
    let half = n / 2;
    let low = correlate_down(&extended, bank.analysis_low(), bank.offset(), half);
    let high = correlate_down(&extended, bank.analysis_high(), bank.offset(), half);
    Ok((low, high))
}

/// Inverse of [`analysis_step_1d`] under the same boundary rule.
pub fn synthesis_step_1d(low: &[f64], high: &[f64], bank: &FilterBank) -> Result<Vec<f64>> {
    if low.len() != high.len() {
        return Err(WaveletError::LengthMismatch {
            low: low.len(),
            high: high.len(),
        });
    }
    if low.is_empty() {
        return Err(WaveletError::OddLength(0));
    }
    let n = 2 * low.len();
    let boundary = bank.boundary();
    let period = period(n, boundary);
    let mut out = vec![0.0; period];
    let full_low = unfold(low, n, period, bank.low_symmetry(), boundary);
    let full_high = unfold(high, n, period, bank.high_symmetry(), boundary);
    scatter_up(&mut out, &full_low, bank.synthesis_low(), bank.offset());
    scatter_up(&mut out, &full_high, bank.synthesis_high(), bank.offset());
    out.truncate(n);
    Ok(out)
}

fn period(n: usize, boundary: Boundary) -> usize {
    match boundary {
        Boundary::Periodic => n,
        Boundary::Symmetric { whole_sample: false } => 2 * n,
        Boundary::Symmetric { whole_sample: true } => (2 * n - 2).max(2),
    }
}

fn extend(signal: &[f64], boundary: Boundary) -> Vec<f64> {
    let n = signal.len();
    let p = period(n, boundary);
    match boundary {
        Boundary::Periodic => signal.to_vec(),
        Boundary::Symmetric { whole_sample: false } => (0..p)
            .map(|i| if i < n { signal[i] } else { signal[p - 1 - i] })
            .collect(),
        Boundary::Symmetric { whole_sample: true } => {
            (0..p).map(|i| if i < n { signal[i] } else { signal[p - i] }).collect()
        }
    }
}

fn correlate_down(extended: &[f64], filter: &[f64], offset: isize, count: usize) -> Vec<f64> {
    let p = extended.len() as isize;
    (0..count as isize)
        .map(|k| {
            filter
                .iter()
                .enumerate()
                .map(|(j, &f)| f * extended[(2 * k + j as isize - offset).rem_euclid(p) as usize])
                .sum()
        })
        .collect()
}

fn scatter_up(out: &mut [f64], coeffs: &[f64], filter: &[f64], offset: isize) {
    let p = out.len() as isize;
    for (k, &c) in coeffs.iter().enumerate() {
        for (j, &f) in filter.iter().enumerate() {
            out[(2 * k as isize + j as isize - offset).rem_euclid(p) as usize] += f * c;
        }
    }
}

/// Rebuilds one period (`period / 2` values) of a channel from its `n / 2`
/// stored coefficients by mirroring about the right-hand reflection point.
fn unfold(stored: &[f64], n: usize, period: usize, symmetry: ChannelSymmetry, boundary: Boundary) -> Vec<f64> {
    let whole_sample = match boundary {
        Boundary::Periodic => return stored.to_vec(),
        Boundary::Symmetric { whole_sample } => whole_sample,
    };
    let mirror = if whole_sample { n as f64 - 1.0 } else { n as f64 - 0.5 };
    let base = (mirror - symmetry.shift).round() as isize;
    let mut full = Vec::with_capacity(period / 2);
    full.extend_from_slice(stored);
    for k in stored.len()..period / 2 {
        full.push(symmetry.parity * stored[(base - k as isize) as usize]);
    }
    full
}
