//! Performance measures and their text formatting.

use super::{Result, ScenarioError};

/// `(sent - received) / sent`.
pub fn dropping_rate(sent: u64, received: u64) -> Result<f64> {
    if sent == 0 {
        return Err(ScenarioError::Undefined {
            what: "dropping rate",
            why: "no packets were sent",
        });
    }
    Ok((sent - received.min(sent)) as f64 / sent as f64)
}

/// Image packets received over image packets sent.
pub fn throughput(image_sent: u64, image_received: u64) -> Result<f64> {
    if image_sent == 0 {
        return Err(ScenarioError::Undefined {
            what: "throughput",
            why: "no image packets were sent",
        });
    }
    Ok(image_received.min(image_sent) as f64 / image_sent as f64)
}

/// Seconds of channel time one uncompressed image needs.
pub fn bandwidth_required(image_bits: u64, available_bps: f64) -> Result<f64> {
    if available_bps.is_nan() || available_bps <= 0.0 {
        return Err(ScenarioError::Undefined {
            what: "bandwidth requirement",
            why: "available bandwidth is not positive",
        });
    }
    Ok(image_bits as f64 / available_bps)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverheadPair {
    /// `code / (code + image)`
    pub agent_fraction: f64,
    /// `image / (code + image)`
    pub image_fraction: f64,
}

pub fn agent_overhead(image_bytes: usize, code_bytes: usize) -> Result<OverheadPair> {
    if image_bytes == 0 || code_bytes == 0 {
        return Err(ScenarioError::Undefined {
            what: "agent overhead",
            why: "image and code sizes must be positive",
        });
    }
    let total = (image_bytes + code_bytes) as f64;
    let agent_fraction = code_bytes as f64 / total;
    Ok(OverheadPair {
        agent_fraction,
        image_fraction: 1.0 - agent_fraction,
    })
}

/// Middle value of the finite entries, averaging the two central ones for
/// even counts. NaN when nothing finite remains.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Formats like C's `%.6g`: six significant digits, trailing zeros
/// trimmed, exponent form outside `[1e-4, 1e6)`.
pub fn format_sig(v: f64) -> String {
    const DIGITS: i32 = 6;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Scalar results of one scenario run. Undefined quantities are NaN.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsReport {
    pub dropping_rate: f64,
    pub throughput: f64,
    pub bandwidth_required_s: f64,
    pub bandwidth_required_pct: f64,
    pub fusion_time_ms: f64,
    pub fusion_time_low_ms: f64,
    pub fusion_time_high_ms: f64,
    pub agent_overhead: f64,
    pub overhead_literal: f64,
    pub error_std: f64,
    pub error_mse: f64,
    pub t_load_total: u64,
    pub packets_sent: u64,
    pub packets_received: u64,
    pub image_packets_sent: u64,
    pub image_packets_received: u64,
    pub reports_sent: u64,
    pub reports_delivered: u64,
    pub active_interpretations: u64,
    pub agents_dispatched: u64,
    pub agents_delivered: u64,
    pub nodes_visited: u64,
    pub power_day_noncritical_mw: f64,
    pub power_day_critical_mw: f64,
    pub power_night_mw: f64,
    pub dead_nodes: u64,
    pub mean_battery_mv: f64,
}

impl MetricsReport {
    /// Column names and values, in CSV order.
    pub fn columns(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("dropping_rate", self.dropping_rate),
            ("throughput", self.throughput),
            ("bandwidth_required_s", self.bandwidth_required_s),
            ("bandwidth_required_pct", self.bandwidth_required_pct),
            ("fusion_time_ms", self.fusion_time_ms),
            ("fusion_time_low_ms", self.fusion_time_low_ms),
            ("fusion_time_high_ms", self.fusion_time_high_ms),
            ("agent_overhead", self.agent_overhead),
            ("overhead_literal", self.overhead_literal),
            ("error_std", self.error_std),
            ("error_mse", self.error_mse),
            ("t_load_total", self.t_load_total as f64),
            ("packets_sent", self.packets_sent as f64),
            ("packets_received", self.packets_received as f64),
            ("image_packets_sent", self.image_packets_sent as f64),
            ("image_packets_received", self.image_packets_received as f64),
            ("reports_sent", self.reports_sent as f64),
            ("reports_delivered", self.reports_delivered as f64),
            ("active_interpretations", self.active_interpretations as f64),
            ("agents_dispatched", self.agents_dispatched as f64),
            ("agents_delivered", self.agents_delivered as f64),
            ("nodes_visited", self.nodes_visited as f64),
            ("power_day_noncritical_mw", self.power_day_noncritical_mw),
            ("power_day_critical_mw", self.power_day_critical_mw),
            ("power_night_mw", self.power_night_mw),
            ("dead_nodes", self.dead_nodes as f64),
            ("mean_battery_mv", self.mean_battery_mv),
        ]
    }

    pub fn column_names() -> Vec<&'static str> {
        MetricsReport::default().columns().into_iter().map(|(k, _)| k).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.columns().into_iter().find(|(k, _)| *k == name).map(|(_, v)| v)
    }

    pub fn csv_header() -> String {
        MetricsReport::column_names().join(",")
    }

    pub fn csv_row(&self) -> String {
        self.columns()
            .into_iter()
            .map(|(_, v)| format_sig(v))
            .collect::<Vec<_>>()
            .join(",")
    }
}
