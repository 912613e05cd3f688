use ndarray::{Array2, Zip};

use super::{FusionError, Result};
use crate::wavelet::{DetailBands, SubbandPyramid};

/// Which input supplies a fused coefficient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Source {
    #[default]
    A,
    B,
}

/// Per-coefficient source selection, laid out like the pyramids it came
/// from. `details[i]` holds the LH, HL and HH maps of level `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionMap {
    pub approximation: Array2<Source>,
    pub details: Vec<[Array2<Source>; 3]>,
}

impl DecisionMap {
    pub fn detail_entries(&self) -> impl Iterator<Item = Source> + '_ {
        self.details
            .iter()
            .flat_map(|level| level.iter().flat_map(|band| band.iter().copied()))
    }

    pub fn count(&self, source: Source) -> usize {
        self.approximation.iter().filter(|&&s| s == source).count()
            + self.detail_entries().filter(|&s| s == source).count()
    }

    fn check_layout(&self, pyramid: &SubbandPyramid) -> Result<()> {
        let fits = self.approximation.dim() == pyramid.approximation.dim()
            && self.details.len() == pyramid.details.len()
            && self
                .details
                .iter()
                .zip(&pyramid.details)
                .all(|(m, d)| m.iter().zip(d.bands()).all(|(mb, pb)| mb.dim() == pb.dim()));
        if fits {
            Ok(())
        } else {
            Err(FusionError::InvalidProfile(
                "decision map layout differs from the pyramids".into(),
            ))
        }
    }
}

/// Edge-clipped `w`×`w` window sums of squared coefficients.
fn activity(band: &Array2<f64>, window: usize) -> Array2<f64> {
    let (rows, cols) = band.dim();
    let r = window / 2;
    // summed-area table of squares, one row/column of zero padding
    let mut sat = Array2::<f64>::zeros((rows + 1, cols + 1));
    for i in 0..rows {
        for j in 0..cols {
            let v = band[[i, j]];
            sat[[i + 1, j + 1]] = v * v + sat[[i, j + 1]] + sat[[i + 1, j]] - sat[[i, j]];
        }
    }
    Array2::from_shape_fn((rows, cols), |(i, j)| {
        let (top, left) = (i.saturating_sub(r), j.saturating_sub(r));
        let (bottom, right) = ((i + r + 1).min(rows), (j + r + 1).min(cols));
        sat[[bottom, right]] - sat[[top, right]] - sat[[bottom, left]] + sat[[top, left]]
    })
}

fn select_band(a: &Array2<f64>, b: &Array2<f64>, window: usize) -> Array2<Source> {
    let (act_a, act_b) = (activity(a, window), activity(b, window));
    Zip::from(&act_a)
        .and(&act_b)
        .map_collect(|&x, &y| if x >= y { Source::A } else { Source::B })
}

/// Area-based maximum selection: each detail coefficient goes to the input
/// with the larger local energy, `A` on ties.
pub fn decision_map(a: &SubbandPyramid, b: &SubbandPyramid, window: usize) -> Result<DecisionMap> {
    a.check_compatible(b)?;
    if window == 0 || window.is_multiple_of(2) {
        return Err(FusionError::InvalidProfile(format!(
            "window {window} must be odd and at least 1"
        )));
    }
    let details = a
        .details
        .iter()
        .zip(&b.details)
        .map(|(da, db)| {
            let [x0, x1, x2] = da.bands();
            let [y0, y1, y2] = db.bands();
            [
                select_band(x0, y0, window),
                select_band(x1, y1, window),
                select_band(x2, y2, window),
            ]
        })
        .collect();
    Ok(DecisionMap {
        approximation: Array2::from_elem(a.approximation.dim(), Source::A),
        details,
    })
}

fn majority(band: &Array2<Source>) -> Array2<Source> {
    let (rows, cols) = band.dim();
    Array2::from_shape_fn((rows, cols), |(i, j)| {
        let mut votes_b = 0usize;
        let mut cells = 0usize;
        for y in i.saturating_sub(1)..(i + 2).min(rows) {
            for x in j.saturating_sub(1)..(j + 2).min(cols) {
                cells += 1;
                if band[[y, x]] == Source::B {
                    votes_b += 1;
                }
            }
        }
        match (2 * votes_b).cmp(&cells) {
            std::cmp::Ordering::Greater => Source::B,
            std::cmp::Ordering::Less => Source::A,
            std::cmp::Ordering::Equal => band[[i, j]],
        }
    })
}

/// 3×3 majority filter over every detail band; ties keep the entry.
pub fn consistency_verify(map: &DecisionMap) -> DecisionMap {
    DecisionMap {
        approximation: map.approximation.clone(),
        details: map
            .details
            .iter()
            .map(|level| [majority(&level[0]), majority(&level[1]), majority(&level[2])])
            .collect(),
    }
}

fn pick(a: &Array2<f64>, b: &Array2<f64>, map: &Array2<Source>) -> Array2<f64> {
    Zip::from(a).and(b).and(map).map_collect(|&x, &y, &s| match s {
        Source::A => x,
        Source::B => y,
    })
}

/// Detail coefficients taken from the mapped source; the approximation band
/// is the mean of both inputs.
pub fn combine(a: &SubbandPyramid, b: &SubbandPyramid, map: &DecisionMap) -> Result<SubbandPyramid> {
    a.check_compatible(b)?;
    map.check_layout(a)?;
    let details = a
        .details
        .iter()
        .zip(&b.details)
        .zip(&map.details)
        .map(|((da, db), m)| DetailBands {
            horizontal: pick(&da.horizontal, &db.horizontal, &m[0]),
            vertical: pick(&da.vertical, &db.vertical, &m[1]),
            diagonal: pick(&da.diagonal, &db.diagonal, &m[2]),
        })
        .collect();
    Ok(SubbandPyramid {
        approximation: (&a.approximation + &b.approximation) * 0.5,
        details,
        ..a.clone()
    })
}
