//! Flat `key = value` experiment configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use super::{Result, ScenarioError};
use crate::agency::{ActivityRule, TemplateMatch};
use crate::energy::{DailyWindow, EnergyConfig};
use crate::fusion::{FusionMode, FusionProfile, ResolutionClass};
use crate::imagecore::BitDepth;
use crate::netsim::{ChannelConfig, LossModel, Position, SimTime, TopologyParams, MICROS_PER_MS};
use crate::wavelet::Basis;

const MICROS_PER_MINUTE: SimTime = 60_000_000;

/// Where sensor frames come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeedSource {
    /// Generated in memory from the run seed.
    Synthetic,
    /// A directory holding a `manifest.txt`.
    Directory(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub num_nodes: usize,
    pub sink_x_m: f64,
    pub sink_y_m: f64,
    pub comm_radius_m: f64,
    pub net_bandwidth_bps: f64,
    pub propagation_beta: f64,
    pub tx_power_mw: f64,
    /// `None` ties the receive threshold to the radius.
    pub rx_threshold_mw: Option<f64>,
    pub packet_payload_bytes: usize,
    pub per_hop_overhead_ms: f64,
    pub node_battery_mv: f64,
    pub threshold_pct: f64,
    pub activity_rule: ActivityRule,
    pub template_match: TemplateMatch,
    pub low_profile: FusionProfile,
    pub high_profile: FusionProfile,
    pub fusion_mode: FusionMode,
    pub fusion_factor: f64,
    pub f_code_bytes: usize,
    pub duty_listen_ms: f64,
    pub duty_sleep_ms: f64,
    /// `None` derives the per-hop loss from the threshold.
    pub loss_probability: Option<f64>,
    /// Minutes after midnight.
    pub sensing_times: Vec<u32>,
    pub days: usize,
    pub night_start: u32,
    pub night_end: u32,
    pub daylight_start: u32,
    pub daylight_end: u32,
    pub recharge_mv_per_hour: f64,
    pub cost_mv: [f64; 3],
    pub power_mw: [f64; 3],
    pub low_battery_fraction: f64,
    pub image_feed: FeedSource,
    pub image_size: usize,
    pub active_fraction: f64,
    pub critical_fraction: f64,
    pub critical_templates: usize,
    pub blur_sigma: f64,
    pub processing_us_per_pixel: f64,
    pub high_processing_factor: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            area_width_m: 100.0,
            area_height_m: 200.0,
            num_nodes: 5,
            sink_x_m: 0.0,
            sink_y_m: 0.0,
            comm_radius_m: 10.0,
            net_bandwidth_bps: 4.0e6,
            propagation_beta: 3.5,
            tx_power_mw: 14.2,
            rx_threshold_mw: None,
            packet_payload_bytes: 1024,
            per_hop_overhead_ms: 1.0,
            node_battery_mv: 90.0,
            threshold_pct: 60.0,
            activity_rule: ActivityRule::DifferenceEntropy,
            template_match: TemplateMatch::Exact,
            low_profile: FusionProfile::low_resolution(),
            high_profile: FusionProfile::high_resolution(),
            fusion_mode: FusionMode::Wavelet,
            fusion_factor: 1.0,
            f_code_bytes: 4096,
            duty_listen_ms: 100.0,
            duty_sleep_ms: 50.0,
            loss_probability: None,
            sensing_times: vec![8 * 60, 11 * 60 + 30, 17 * 60, 19 * 60],
            days: 1,
            night_start: 19 * 60,
            night_end: 6 * 60,
            daylight_start: 6 * 60,
            daylight_end: 18 * 60,
            recharge_mv_per_hour: 1.0,
            cost_mv: [1.0, 2.0, 3.0],
            power_mw: [3.1, 9.0, 14.2],
            low_battery_fraction: 0.1,
            image_feed: FeedSource::Synthetic,
            image_size: 64,
            active_fraction: 0.6,
            critical_fraction: 0.25,
            critical_templates: 2,
            blur_sigma: 2.0,
            processing_us_per_pixel: 1.0,
            high_processing_factor: 4.0,
            seed: 1,
        }
    }
}

fn bad(key: &str, value: &str, why: impl Into<String>) -> ScenarioError {
    ScenarioError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: why.into(),
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| bad(key, value, "not a number of the expected kind"))
}

fn optional(key: &str, value: &str) -> Result<Option<f64>> {
    if value.eq_ignore_ascii_case("auto") {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

fn clock(key: &str, value: &str) -> Result<u32> {
    let (h, m) = value.split_once(':').ok_or_else(|| bad(key, value, "expected HH:MM"))?;
    let (h, m): (u32, u32) = (num(key, h)?, num(key, m)?);
    if h >= 24 || m >= 60 {
        return Err(bad(key, value, "not a time of day"));
    }
    Ok(h * 60 + m)
}

fn show_clock(minutes: u32) -> String {
    format!("{:02}:{:02}", minutes / 60, minutes % 60)
}

fn show_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |v| v.to_string())
}

fn parse_basis(key: &str, value: &str) -> Result<Basis> {
    value.parse().map_err(|_| bad(key, value, "unknown wavelet basis"))
}

fn parse_depth(key: &str, value: &str) -> Result<BitDepth> {
    BitDepth::from_bits(num(key, value)?).map_err(|_| bad(key, value, "bit depth must be 8, 12, 16 or 24"))
}

impl ScenarioConfig {
    /// Every key with its current value, in file order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let p = |prof: &FusionProfile| {
            (
                prof.basis.name().to_string(),
                prof.levels.to_string(),
                prof.output_bit_depth.bits().to_string(),
                prof.window.to_string(),
            )
        };
        let (lb, ll, lbits, lw) = p(&self.low_profile);
        let (hb, hl, hbits, hw) = p(&self.high_profile);
        vec![
            ("area_width_m", self.area_width_m.to_string()),
            ("area_height_m", self.area_height_m.to_string()),
            ("num_nodes", self.num_nodes.to_string()),
            ("sink_x_m", self.sink_x_m.to_string()),
            ("sink_y_m", self.sink_y_m.to_string()),
            ("comm_radius_m", self.comm_radius_m.to_string()),
            ("net_bandwidth_bps", self.net_bandwidth_bps.to_string()),
            ("propagation_beta", self.propagation_beta.to_string()),
            ("tx_power_mw", self.tx_power_mw.to_string()),
            ("rx_threshold_mw", show_opt(self.rx_threshold_mw)),
            ("packet_payload_bytes", self.packet_payload_bytes.to_string()),
            ("per_hop_overhead_ms", self.per_hop_overhead_ms.to_string()),
            ("node_battery_mv", self.node_battery_mv.to_string()),
            ("threshold_pct", self.threshold_pct.to_string()),
            ("activity_rule", self.activity_rule.to_string()),
            (
                "template_match",
                match self.template_match {
                    TemplateMatch::Exact => "exact".to_string(),
                    TemplateMatch::Tolerance(t) => format!("tolerance:{t}"),
                },
            ),
            ("low_basis", lb),
            ("low_levels", ll),
            ("low_bits", lbits),
            ("low_window", lw),
            ("high_basis", hb),
            ("high_levels", hl),
            ("high_bits", hbits),
            ("high_window", hw),
            ("fusion_mode", self.fusion_mode.to_string()),
            ("fusion_factor", self.fusion_factor.to_string()),
            ("f_code_bytes", self.f_code_bytes.to_string()),
            ("duty_listen_ms", self.duty_listen_ms.to_string()),
            ("duty_sleep_ms", self.duty_sleep_ms.to_string()),
            ("loss_probability", show_opt(self.loss_probability)),
            (
                "sensing_times",
                self.sensing_times
                    .iter()
                    .map(|&m| show_clock(m))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("days", self.days.to_string()),
            ("night_start", show_clock(self.night_start)),
            ("night_end", show_clock(self.night_end)),
            ("daylight_start", show_clock(self.daylight_start)),
            ("daylight_end", show_clock(self.daylight_end)),
            ("recharge_mv_per_hour", self.recharge_mv_per_hour.to_string()),
            ("cost_day_noncritical_mv", self.cost_mv[0].to_string()),
            ("cost_day_critical_mv", self.cost_mv[1].to_string()),
            ("cost_night_mv", self.cost_mv[2].to_string()),
            ("power_day_noncritical_mw", self.power_mw[0].to_string()),
            ("power_day_critical_mw", self.power_mw[1].to_string()),
            ("power_night_mw", self.power_mw[2].to_string()),
            ("low_battery_fraction", self.low_battery_fraction.to_string()),
            (
                "image_feed",
                match &self.image_feed {
                    FeedSource::Synthetic => "synthetic".to_string(),
                    FeedSource::Directory(p) => p.display().to_string(),
                },
            ),
            ("image_size", self.image_size.to_string()),
            ("active_fraction", self.active_fraction.to_string()),
            ("critical_fraction", self.critical_fraction.to_string()),
            ("critical_templates", self.critical_templates.to_string()),
            ("blur_sigma", self.blur_sigma.to_string()),
            ("processing_us_per_pixel", self.processing_us_per_pixel.to_string()),
            ("high_processing_factor", self.high_processing_factor.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    pub fn keys() -> Vec<&'static str> {
        ScenarioConfig::default()
            .entries()
            .into_iter()
            .map(|(k, _)| k)
            .collect()
    }

    /// Assigns one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "area_width_m" => self.area_width_m = num(key, value)?,
            "area_height_m" => self.area_height_m = num(key, value)?,
            "num_nodes" => self.num_nodes = num(key, value)?,
            "sink_x_m" => self.sink_x_m = num(key, value)?,
            "sink_y_m" => self.sink_y_m = num(key, value)?,
            "comm_radius_m" => self.comm_radius_m = num(key, value)?,
            "net_bandwidth_bps" => self.net_bandwidth_bps = num(key, value)?,
            "propagation_beta" => self.propagation_beta = num(key, value)?,
            "tx_power_mw" => self.tx_power_mw = num(key, value)?,
            "rx_threshold_mw" => self.rx_threshold_mw = optional(key, value)?,
            "packet_payload_bytes" => self.packet_payload_bytes = num(key, value)?,
            "per_hop_overhead_ms" => self.per_hop_overhead_ms = num(key, value)?,
            "node_battery_mv" => self.node_battery_mv = num(key, value)?,
            "threshold_pct" => self.threshold_pct = num(key, value)?,
            "activity_rule" => {
                self.activity_rule = value
                    .parse()
                    .map_err(|_| bad(key, value, "expected difference or ratio"))?
            }
            "template_match" => {
                self.template_match = if value.eq_ignore_ascii_case("exact") {
                    TemplateMatch::Exact
                } else if value.eq_ignore_ascii_case("tolerance") {
                    TemplateMatch::Tolerance(4.0)
                } else if let Some(t) = value.strip_prefix("tolerance:") {
                    TemplateMatch::Tolerance(num(key, t)?)
                } else {
                    return Err(bad(key, value, "expected exact, tolerance or tolerance:TAU"));
                }
            }
            "low_basis" => self.low_profile.basis = parse_basis(key, value)?,
            "low_levels" => self.low_profile.levels = num(key, value)?,
            "low_bits" => self.low_profile.output_bit_depth = parse_depth(key, value)?,
            "low_window" => self.low_profile.window = num(key, value)?,
            "high_basis" => self.high_profile.basis = parse_basis(key, value)?,
            "high_levels" => self.high_profile.levels = num(key, value)?,
            "high_bits" => self.high_profile.output_bit_depth = parse_depth(key, value)?,
            "high_window" => self.high_profile.window = num(key, value)?,
            "fusion_mode" => {
                self.fusion_mode = value
                    .parse()
                    .map_err(|_| bad(key, value, "expected WAVELET or ADDITIVE"))?
            }
            "fusion_factor" => self.fusion_factor = num(key, value)?,
            "f_code_bytes" => self.f_code_bytes = num(key, value)?,
            "duty_listen_ms" => self.duty_listen_ms = num(key, value)?,
            "duty_sleep_ms" => self.duty_sleep_ms = num(key, value)?,
            "loss_probability" => self.loss_probability = optional(key, value)?,
            "sensing_times" => {
                self.sensing_times = value.split(',').map(|t| clock(key, t.trim())).collect::<Result<_>>()?
            }
            "days" => self.days = num(key, value)?,
            "night_start" => self.night_start = clock(key, value)?,
            "night_end" => self.night_end = clock(key, value)?,
            "daylight_start" => self.daylight_start = clock(key, value)?,
            "daylight_end" => self.daylight_end = clock(key, value)?,
            "recharge_mv_per_hour" => self.recharge_mv_per_hour = num(key, value)?,
            "cost_day_noncritical_mv" => self.cost_mv[0] = num(key, value)?,
            "cost_day_critical_mv" => self.cost_mv[1] = num(key, value)?,
            "cost_night_mv" => self.cost_mv[2] = num(key, value)?,
            "power_day_noncritical_mw" => self.power_mw[0] = num(key, value)?,
            "power_day_critical_mw" => self.power_mw[1] = num(key, value)?,
            "power_night_mw" => self.power_mw[2] = num(key, value)?,
            "low_battery_fraction" => self.low_battery_fraction = num(key, value)?,
            "image_feed" => {
                self.image_feed = if value.eq_ignore_ascii_case("synthetic") {
                    FeedSource::Synthetic
                } else {
                    FeedSource::Directory(PathBuf::from(value))
                }
            }
            "image_size" => self.image_size = num(key, value)?,
            "active_fraction" => self.active_fraction = num(key, value)?,
            "critical_fraction" => self.critical_fraction = num(key, value)?,
            "critical_templates" => self.critical_templates = num(key, value)?,
            "blur_sigma" => self.blur_sigma = num(key, value)?,
            "processing_us_per_pixel" => self.processing_us_per_pixel = num(key, value)?,
            "high_processing_factor" => self.high_processing_factor = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(ScenarioError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Parses config text over the defaults. `#` starts a comment; blank
    /// lines are ignored; repeating a key is an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ScenarioConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ScenarioError::Syntax {
                line: n + 1,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(ScenarioError::DuplicateKey(key.to_string()));
            }
            config.set(key, value)?;
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Every entry as `# key = value` lines followed by the config hash.
    pub fn header_lines(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "# config_sha256 = {}", self.sha256());
        out
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ScenarioError::Invalid(format!("{key} must be positive, got {v}")))
            }
        };
        let fraction = |key: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ScenarioError::Invalid(format!("{key} must lie in [0, 1], got {v}")))
            }
        };
        if self.num_nodes < 2 {
            return Err(ScenarioError::Invalid(format!(
                "num_nodes must be at least 2, got {}",
                self.num_nodes
            )));
        }
        positive("area_width_m", self.area_width_m)?;
        positive("area_height_m", self.area_height_m)?;
        positive("comm_radius_m", self.comm_radius_m)?;
        positive("net_bandwidth_bps", self.net_bandwidth_bps)?;
        positive("propagation_beta", self.propagation_beta)?;
        positive("tx_power_mw", self.tx_power_mw)?;
        positive("node_battery_mv", self.node_battery_mv)?;
        positive("duty_listen_ms", self.duty_listen_ms)?;
        positive("blur_sigma", self.blur_sigma)?;
        if self.packet_payload_bytes == 0 {
            return Err(ScenarioError::Invalid("packet_payload_bytes must be positive".into()));
        }
        if self.f_code_bytes == 0 {
            return Err(ScenarioError::Invalid("f_code_bytes must be positive".into()));
        }
        if !(self.threshold_pct > 0.0 && self.threshold_pct <= 100.0) {
            return Err(ScenarioError::Invalid(format!(
                "threshold_pct must lie in (0, 100], got {}",
                self.threshold_pct
            )));
        }
        if !(self.duty_sleep_ms >= 0.0 && self.per_hop_overhead_ms >= 0.0) {
            return Err(ScenarioError::Invalid("durations must be non-negative".into()));
        }
        if !(self.processing_us_per_pixel >= 0.0 && self.high_processing_factor >= 0.0) {
            return Err(ScenarioError::Invalid("processing costs must be non-negative".into()));
        }
        fraction("active_fraction", self.active_fraction)?;
        fraction("critical_fraction", self.critical_fraction)?;
        if let Some(p) = self.loss_probability {
            fraction("loss_probability", p)?;
        }
        if self.sensing_times.is_empty() || self.days == 0 {
            return Err(ScenarioError::Invalid(
                "at least one sensing time and one day are required".into(),
            ));
        }
        if self.sensing_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScenarioError::Invalid(
                "sensing_times must be strictly increasing".into(),
            ));
        }
        if self.sensing_times[0] == 0 {
            return Err(ScenarioError::Invalid(
                "sensing_times must start after 00:00, which is the reference capture".into(),
            ));
        }
        if self.critical_fraction > 0.0 && self.critical_templates == 0 {
            return Err(ScenarioError::Invalid(
                "critical_fraction needs critical_templates > 0".into(),
            ));
        }
        let max_levels = self.low_profile.levels.max(self.high_profile.levels);
        if self.image_size < 2 || !self.image_size.is_multiple_of(1 << max_levels.min(16)) {
            return Err(ScenarioError::Invalid(format!(
                "image_size {} must be divisible by 2^{max_levels}",
                self.image_size
            )));
        }
        self.low_profile().validate()?;
        self.high_profile().validate()?;
        self.energy_config().validate()?;
        self.channel_config().validate()?;
        Ok(())
    }

    pub fn topology_params(&self) -> TopologyParams {
        TopologyParams {
            width_m: self.area_width_m,
            height_m: self.area_height_m,
            num_nodes: self.num_nodes,
            sink_position: Position {
                x: self.sink_x_m,
                y: self.sink_y_m,
            },
            comm_radius_m: self.comm_radius_m,
            propagation_beta: self.propagation_beta,
            tx_power_mw: self.tx_power_mw,
            rx_threshold_mw: self.rx_threshold_mw,
            listen: ms_to_micros(self.duty_listen_ms),
            sleep: ms_to_micros(self.duty_sleep_ms),
        }
    }

    /// Configured loss, or `(100 - Th) / 500`.
    pub fn effective_loss(&self) -> f64 {
        self.loss_probability.unwrap_or((100.0 - self.threshold_pct) / 500.0)
    }

    pub fn channel_config(&self) -> ChannelConfig {
        ChannelConfig {
            bandwidth_bps: self.net_bandwidth_bps,
            packet_payload_bytes: self.packet_payload_bytes,
            per_hop_overhead: ms_to_micros(self.per_hop_overhead_ms),
            loss: LossModel::Bernoulli(self.effective_loss()),
        }
    }

    pub fn energy_config(&self) -> EnergyConfig {
        EnergyConfig {
            cost_mv: self.cost_mv,
            power_mw: self.power_mw,
            low_battery_fraction: self.low_battery_fraction,
            daylight: minute_window(self.daylight_start, self.daylight_end),
            recharge_mv_per_hour: self.recharge_mv_per_hour,
        }
    }

    pub fn night_window(&self) -> DailyWindow {
        minute_window(self.night_start, self.night_end)
    }

    fn finish_profile(&self, mut p: FusionProfile, class: ResolutionClass) -> FusionProfile {
        p.resolution = class;
        p.mode = self.fusion_mode;
        p.fusion_factor = self.fusion_factor;
        p
    }

    pub fn low_profile(&self) -> FusionProfile {
        self.finish_profile(self.low_profile.clone(), ResolutionClass::Low)
    }

    pub fn high_profile(&self) -> FusionProfile {
        self.finish_profile(self.high_profile.clone(), ResolutionClass::High)
    }

    /// Scheduled capture instants over all days, reference capture excluded.
    pub fn schedule(&self) -> Vec<SimTime> {
        (0..self.days as SimTime)
            .flat_map(|d| {
                self.sensing_times
                    .iter()
                    .map(move |&m| d * crate::energy::MICROS_PER_DAY + SimTime::from(m) * MICROS_PER_MINUTE)
            })
            .collect()
    }
}

fn ms_to_micros(v: f64) -> SimTime {
    (v * MICROS_PER_MS as f64).round() as SimTime
}

fn minute_window(start: u32, end: u32) -> DailyWindow {
    DailyWindow {
        start: SimTime::from(start) * MICROS_PER_MINUTE,
        end: SimTime::from(end) * MICROS_PER_MINUTE,
    }
}
