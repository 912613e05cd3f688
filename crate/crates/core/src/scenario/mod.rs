//! Experiment driver: configuration, image feeds, the round-by-round
//! scenario engine, metrics, parameter sweeps and their CSV/plot output.

mod config;
mod engine;
mod feed;
mod metrics;
mod output;
mod sweep;

use std::path::PathBuf;

pub use config::{FeedSource, ScenarioConfig};
pub use engine::{run_scenario, run_with_feed, BatterySample, RunOutput};
pub use feed::{ImageFeed, MANIFEST};
pub use metrics::{
    agent_overhead, bandwidth_required, dropping_rate, format_sig, median, throughput, MetricsReport, OverheadPair,
};
pub use output::{write_run, AGENTS_FILE, BATTERY_FILE, EVENTS_FILE, METRICS_FILE};
pub use sweep::{sweep, sweep_seeds, SweepTable, SWEEP_FILE};

use crate::agency::AgencyError;
use crate::energy::EnergyError;
use crate::fusion::FusionError;
use crate::imagecore::ImageError;
use crate::netsim::{NetError, NodeId};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("config key {0:?} given more than once")]
    DuplicateKey(String),
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("unknown sweep axis {0:?}")]
    UnknownAxis(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image feed: {0}")]
    Feed(String),
    #[error("image feed has no frame for round {round}, node {node}")]
    MissingFrame { round: usize, node: NodeId },
    #[error("{what} is undefined: {why}")]
    Undefined { what: &'static str, why: &'static str },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Agency(#[from] AgencyError),
}

pub type Result<T, E = ScenarioError> = std::result::Result<T, E>;

fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> ScenarioError {
    let path = path.into();
    move |source| ScenarioError::Io { path, source }
}
