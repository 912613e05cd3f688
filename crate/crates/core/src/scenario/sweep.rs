//! One-parameter studies, optionally repeated over seeds.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::metrics::{format_sig, median};
use super::{io_err, run_scenario, MetricsReport, Result, ScenarioConfig, ScenarioError};

pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub base: ScenarioConfig,
    pub axis: String,
    pub values: Vec<String>,
    pub seeds: Vec<u64>,
    /// One row per axis value, columns as in [`MetricsReport::columns`].
    pub rows: Vec<Vec<f64>>,
}

/// Runs `base` once per value of `axis` with the base seed.
pub fn sweep(base: &ScenarioConfig, axis: &str, values: &[String]) -> Result<SweepTable> {
    sweep_seeds(base, axis, values, &[base.seed])
}

/// Runs every `(value, seed)` pair in parallel; each cell is the median
/// over seeds of the finite results.
pub fn sweep_seeds(base: &ScenarioConfig, axis: &str, values: &[String], seeds: &[u64]) -> Result<SweepTable> {
    if axis == "seed" || !ScenarioConfig::keys().contains(&axis) {
        return Err(ScenarioError::UnknownAxis(axis.to_string()));
    }
    if values.is_empty() || seeds.is_empty() {
        return Err(ScenarioError::Invalid(
            "a sweep needs at least one value and one seed".into(),
        ));
    }
    let mut configs = Vec::with_capacity(values.len());
    for v in values {
        let mut c = base.clone();
        c.set(axis, v)?;
        c.validate()?;
        configs.push(c);
    }
    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let results: Vec<Result<MetricsReport>> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let config = ScenarioConfig {
                seed,
                ..configs[i].clone()
            };
            run_scenario(&config).map(|out| out.metrics)
        })
        .collect();
    let mut reports = Vec::with_capacity(results.len());
    for r in results {
        reports.push(r?);
    }
    let width = MetricsReport::column_names().len();
    let rows = reports
        .chunks(seeds.len())
        .map(|per_seed| {
            let cols: Vec<Vec<(&str, f64)>> = per_seed.iter().map(MetricsReport::columns).collect();
            (0..width)
                .map(|k| median(&cols.iter().map(|c| c[k].1).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    Ok(SweepTable {
        base: base.clone(),
        axis: axis.to_string(),
        values: values.to_vec(),
        seeds: seeds.to_vec(),
        rows,
    })
}

impl SweepTable {
    pub fn column(&self, metric: &str) -> Option<Vec<f64>> {
        let k = MetricsReport::column_names().iter().position(|&n| n == metric)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.base.header_lines();
        let _ = writeln!(out, "# sweep_axis = {}", self.axis);
        let _ = writeln!(
            out,
            "# sweep_seeds = {}",
            self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
        );
        let _ = writeln!(out, "{},{}", self.axis, MetricsReport::csv_header());
        for (value, row) in self.values.iter().zip(&self.rows) {
            let cells: Vec<String> = row.iter().map(|&v| format_sig(v)).collect();
            let _ = writeln!(out, "{value},{}", cells.join(","));
        }
        out
    }

    /// One gnuplot script per metric, plotting it against the axis.
    pub fn plot_scripts(&self) -> Vec<(String, String)> {
        MetricsReport::column_names()
            .into_iter()
            .enumerate()
            .map(|(k, metric)| {
                let script = format!(
                    "set datafile separator ','\n\
                     set key autotitle columnhead\n\
                     set xlabel '{axis}'\n\
                     set ylabel '{metric}'\n\
                     set grid\n\
                     set terminal pngcairo size 800,600\n\
                     set output '{metric}.png'\n\
                     plot '{SWEEP_FILE}' using 0:{col}:xtic(1) with linespoints\n",
                    axis = self.axis,
                    col = k + 2,
                );
                (format!("{metric}.gp"), script)
            })
            .collect()
    }

    /// Writes `sweep.csv` and the plot scripts into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(SWEEP_FILE);
        std::fs::write(&path, self.to_csv()).map_err(io_err(&path))?;
        for (name, script) in self.plot_scripts() {
            let path = dir.join(name);
            std::fs::write(&path, script).map_err(io_err(&path))?;
        }
        Ok(())
    }
}
