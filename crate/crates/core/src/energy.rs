//! Battery bookkeeping in abstract millivolt units: per-usage debits by
//! usage class and daytime solar recharge.

use std::fmt;
use std::str::FromStr;

use crate::netsim::{SimTime, MICROS_PER_HOUR};

pub const MICROS_PER_DAY: SimTime = 24 * MICROS_PER_HOUR;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EnergyError {
    #[error("battery exhausted")]
    Exhausted,
    #[error("invalid energy configuration: {0}")]
    InvalidConfig(String),
    #[error("interval ends at {to} before it starts at {from}")]
    BackwardsInterval { from: SimTime, to: SimTime },
    #[error("unknown usage class {0:?}")]
    UnknownClass(String),
}

pub type Result<T, E = EnergyError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UsageClass {
    DayNoncritical,
    DayCritical,
    Night,
}

impl UsageClass {
    pub const ALL: [UsageClass; 3] = [UsageClass::DayNoncritical, UsageClass::DayCritical, UsageClass::Night];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for UsageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UsageClass::DayNoncritical => "DAY_NONCRITICAL",
            UsageClass::DayCritical => "DAY_CRITICAL",
            UsageClass::Night => "NIGHT",
        })
    }
}

impl FromStr for UsageClass {
    type Err = EnergyError;

    fn from_str(s: &str) -> Result<Self> {
        UsageClass::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| EnergyError::UnknownClass(s.to_string()))
    }
}

/// A time-of-day interval `[start, end)`, wrapping past midnight when
/// `end < start`. Offsets are measured from midnight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DailyWindow {
    pub start: SimTime,
    pub end: SimTime,
}

impl DailyWindow {
    pub fn hours(start: u64, end: u64) -> Self {
        DailyWindow {
            start: start * MICROS_PER_HOUR,
            end: end * MICROS_PER_HOUR,
        }
    }

    pub fn contains(&self, at: SimTime) -> bool {
        let t = at % MICROS_PER_DAY;
        if self.start <= self.end {
            (self.start..self.end).contains(&t)
        } else {
            t >= self.start || t < self.end
        }
    }

    /// Length of `[from, to)` that falls inside the window.
    pub fn overlap(&self, from: SimTime, to: SimTime) -> SimTime {
        if to <= from {
            return 0;
        }
        let pieces: Vec<(SimTime, SimTime)> = if self.start <= self.end {
            vec![(self.start, self.end)]
        } else {
            vec![(0, self.end), (self.start, MICROS_PER_DAY)]
        };
        let mut total = 0;
        let mut day = from / MICROS_PER_DAY;
        while day * MICROS_PER_DAY < to {
            let base = day * MICROS_PER_DAY;
            for &(s, e) in &pieces {
                let lo = (base + s).max(from);
                let hi = (base + e).min(to);
                total += hi.saturating_sub(lo);
            }
            day += 1;
        }
        total
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyConfig {
    /// Millivolts per usage event, by class.
    pub cost_mv: [f64; 3],
    /// Draw while active, by class.
    pub power_mw: [f64; 3],
    /// Fraction of the initial charge at which a low-battery report is due.
    pub low_battery_fraction: f64,
    pub daylight: DailyWindow,
    pub recharge_mv_per_hour: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            cost_mv: [1.0, 2.0, 3.0],
            power_mw: [3.1, 9.0, 14.2],
            low_battery_fraction: 0.1,
            daylight: DailyWindow::hours(6, 18),
            recharge_mv_per_hour: 1.0,
        }
    }
}

impl EnergyConfig {
    pub fn cost(&self, class: UsageClass) -> f64 {
        self.cost_mv[class.index()]
    }

    pub fn power(&self, class: UsageClass) -> f64 {
        self.power_mw[class.index()]
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |v: &[f64; 3]| v[0] <= v[1] && v[1] <= v[2];
        if self.cost_mv.iter().any(|&c| !(c > 0.0 && c.is_finite())) || !ordered(&self.cost_mv) {
            return Err(EnergyError::InvalidConfig(format!(
                "usage costs {:?} must be positive and non-decreasing from day non-critical to night",
                self.cost_mv
            )));
        }
        if self.power_mw.iter().any(|&p| !(p >= 0.0 && p.is_finite())) || !ordered(&self.power_mw) {
            return Err(EnergyError::InvalidConfig(format!(
                "usage powers {:?} must be non-negative and non-decreasing",
                self.power_mw
            )));
        }
        if !(0.0..1.0).contains(&self.low_battery_fraction) {
            return Err(EnergyError::InvalidConfig(format!(
                "low battery fraction {} outside [0, 1)",
                self.low_battery_fraction
            )));
        }
        if !(self.recharge_mv_per_hour >= 0.0 && self.recharge_mv_per_hour.is_finite()) {
            return Err(EnergyError::InvalidConfig(format!(
                "recharge rate {} must be non-negative",
                self.recharge_mv_per_hour
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UsageEntry {
    pub at: SimTime,
    pub class: UsageClass,
    pub cost_mv: f64,
}

/// What a debit triggered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DebitOutcome {
    /// The charge just fell to or below the low-battery mark.
    pub crossed_low: bool,
    /// The charge just reached zero; the node is now dead.
    pub exhausted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyState {
    pub battery_mv: f64,
    pub initial_mv: f64,
    pub draw_mw: f64,
    pub usage_log: Vec<UsageEntry>,
    low_reported: bool,
}

impl EnergyState {
    pub fn new(initial_mv: f64) -> Self {
        EnergyState {
            battery_mv: initial_mv,
            initial_mv,
            draw_mw: 0.0,
            usage_log: Vec::new(),
            low_reported: false,
        }
    }

    pub fn is_dead(&self) -> bool {
        self.battery_mv <= 0.0
    }

    pub fn remaining_fraction(&self) -> f64 {
        if self.initial_mv > 0.0 {
            self.battery_mv / self.initial_mv
        } else {
            0.0
        }
    }

    /// Charges one usage event of `class`.
    pub fn debit(&mut self, class: UsageClass, at: SimTime, config: &EnergyConfig) -> Result<DebitOutcome> {
        if self.is_dead() {
            return Err(EnergyError::Exhausted);
        }
        let cost = config.cost(class);
        self.battery_mv = (self.battery_mv - cost).max(0.0);
        self.draw_mw = config.power(class);
        self.usage_log.push(UsageEntry {
            at,
            class,
            cost_mv: cost,
        });
        let mut outcome = DebitOutcome::default();
        if !self.low_reported && self.remaining_fraction() <= config.low_battery_fraction {
            self.low_reported = true;
            outcome.crossed_low = true;
        }
        if self.is_dead() {
            outcome.exhausted = true;
            self.draw_mw = 0.0;
        }
        Ok(outcome)
    }

    /// Adds daylight charge for `[from, to)`, capped at the initial charge.
    /// A dead node stays dead. Returns the gain.
    pub fn solar_recharge(&mut self, from: SimTime, to: SimTime, config: &EnergyConfig) -> Result<f64> {
        if to < from {
            return Err(EnergyError::BackwardsInterval { from, to });
        }
        if self.is_dead() {
            return Ok(0.0);
        }
        let hours = config.daylight.overlap(from, to) as f64 / MICROS_PER_HOUR as f64;
        let before = self.battery_mv;
        self.battery_mv = (before + hours * config.recharge_mv_per_hour).min(self.initial_mv);
        if self.remaining_fraction() > config.low_battery_fraction {
            self.low_reported = false;
        }
        Ok(self.battery_mv - before)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const H: SimTime = MICROS_PER_HOUR;

    #[test]
    fn debit_examples() {
        let cfg = EnergyConfig::default();
        let mut s = EnergyState::new(90.0);
        s.debit(UsageClass::DayNoncritical, 0, &cfg).unwrap();
        assert_eq!(s.battery_mv, 89.0);
        let mut s = EnergyState::new(90.0);
        s.debit(UsageClass::Night, 0, &cfg).unwrap();
        assert_eq!(s.battery_mv, 87.0);
        assert_eq!(s.draw_mw, 14.2);
        let mut s = EnergyState::new(0.0);
        assert_eq!(s.debit(UsageClass::Night, 0, &cfg), Err(EnergyError::Exhausted));
    }

    #[test]
    fn low_battery_and_exhaustion_fire_once() {
        let cfg = EnergyConfig::default();
        let mut s = EnergyState::new(10.0);
        let outcomes: Vec<_> = (0..10)
            .map(|t| s.debit(UsageClass::DayNoncritical, t, &cfg).unwrap())
            .collect();
        assert_eq!(outcomes.iter().filter(|o| o.crossed_low).count(), 1);
        assert!(outcomes[8].crossed_low);
        assert!(outcomes[9].exhausted);
        assert!(s.is_dead());
        assert_eq!(s.usage_log.len(), 10);
    }

    #[test]
    fn recharge_examples() {
        let cfg = EnergyConfig::default();
        let mut s = EnergyState::new(90.0);
        s.battery_mv = 80.0;
        // 19:00 to 05:00 next day is all night
        assert_eq!(s.solar_recharge(19 * H, 29 * H, &cfg).unwrap(), 0.0);
        assert_eq!(s.solar_recharge(7 * H, 7 * H, &cfg).unwrap(), 0.0);
        // ten daylight hours would add 10 mV; clamped to initial
        s.battery_mv = 85.0;
        s.solar_recharge(7 * H, 17 * H, &cfg).unwrap();
        assert_eq!(s.battery_mv, 90.0);
        s.battery_mv = 80.0;
        assert_eq!(s.solar_recharge(7 * H, 17 * H, &cfg).unwrap(), 10.0);
        assert!(s.solar_recharge(5, 4, &cfg).is_err());
    }

    #[test]
    fn windows_wrap_midnight() {
        let night = DailyWindow::hours(19, 6);
        assert!(night.contains(23 * H));
        assert!(night.contains(2 * H));
        assert!(!night.contains(12 * H));
        assert!(!night.contains(6 * H));
        assert_eq!(night.overlap(0, 24 * H), 11 * H);
        let day = DailyWindow::hours(6, 18);
        assert_eq!(day.overlap(0, 48 * H), 24 * H);
        assert_eq!(day.overlap(17 * H, 31 * H), 2 * H);
    }

    #[test]
    fn validation_enforces_class_order() {
        let mut cfg = EnergyConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.cost_mv = [2.0, 1.0, 3.0];
        assert!(cfg.validate().is_err());
        let cfg = EnergyConfig {
            power_mw: [9.0, 3.0, 14.0],
            ..EnergyConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn class_names_round_trip() {
        for c in UsageClass::ALL {
            assert_eq!(c.to_string().parse::<UsageClass>().unwrap(), c);
        }
    }

    proptest! {
        #[test]
        fn debits_never_raise_the_battery(classes in proptest::collection::vec(0usize..3, 1..200)) {
            let cfg = EnergyConfig::default();
            let mut s = EnergyState::new(90.0);
            let mut last = s.battery_mv;
            for (t, c) in classes.into_iter().enumerate() {
                if s.is_dead() { break; }
                s.debit(UsageClass::ALL[c], t as SimTime, &cfg).unwrap();
                prop_assert!(s.battery_mv <= last && s.battery_mv >= 0.0);
                last = s.battery_mv;
            }
        }

        #[test]
        fn recharge_never_exceeds_initial(start in 0u64..(72 * H), len in 0u64..(72 * H), level in 1.0f64..90.0) {
            let cfg = EnergyConfig::default();
            let mut s = EnergyState::new(90.0);
            s.battery_mv = level;
            s.solar_recharge(start, start + len, &cfg).unwrap();
            prop_assert!(s.battery_mv <= 90.0 && s.battery_mv >= level);
        }
    }
}
