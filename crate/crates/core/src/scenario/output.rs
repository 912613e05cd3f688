//! Files written for a single run.

use std::fmt::Write as _;
use std::path::Path;

use super::metrics::format_sig;
use super::{io_err, MetricsReport, Result, RunOutput};

pub const METRICS_FILE: &str = "metrics.csv";
pub const BATTERY_FILE: &str = "battery.csv";
pub const EVENTS_FILE: &str = "events.tsv";
pub const AGENTS_FILE: &str = "agents.tsv";

impl RunOutput {
    pub fn metrics_csv(&self) -> String {
        let mut out = self.config.header_lines();
        let _ = writeln!(out, "{}", MetricsReport::csv_header());
        let _ = writeln!(out, "{}", self.metrics.csv_row());
        out
    }

    pub fn battery_csv(&self) -> String {
        let mut out = self.config.header_lines();
        out.push_str("time_ms,node_id,battery_mv,draw_mw,packets_sent\n");
        for s in &self.battery {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                format_sig(s.at as f64 / 1000.0),
                s.node,
                format_sig(s.battery_mv),
                format_sig(s.draw_mw),
                s.packets_sent
            );
        }
        out
    }
}

/// Writes metrics, battery series, network trace and agent log into `dir`.
pub fn write_run(output: &RunOutput, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let files = [
        (METRICS_FILE, output.metrics_csv()),
        (BATTERY_FILE, output.battery_csv()),
        (EVENTS_FILE, output.trace.to_tsv()),
        (AGENTS_FILE, output.log.to_tsv()),
    ];
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io_err(&path))?;
    }
    Ok(())
}
