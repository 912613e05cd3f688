//! The agent layer: node and sink blackboards, the per-node context and
//! manager agents, the sink manager, and the mobile fusing agent.
//!
//! Calls must follow the interaction order sense, interpret, report,
//! dispatch, visit (repeated), return. Each role keeps its own phase and
//! rejects out-of-order calls with [`AgencyError::OutOfOrder`].

mod blackboard;
mod fusing;
mod log;
mod node;
mod sink;

pub use blackboard::{NodeBlackboard, NodeStatus, SinkBlackboard, SinkRow};
pub use fusing::{fa_migrate, fa_return, fa_skip, fa_visit, FusingAgent, Migration, ReturnOutcome};
pub use log::{AgentKind, AgentLog, AgentLogEntry};
pub use node::{ca_sense, nma_interpret, nma_report, Interpretation, SensorNode, CONTEXT_REPORT_BYTES};
pub use sink::{nearest_neighbor_itinerary, sma_dispatch, DispatchTrigger, SinkManager};

use std::fmt;
use std::str::FromStr;

use crate::energy::{EnergyError, UsageClass};
use crate::fusion::{FusionError, FusionProfile};
use crate::imagecore::{Image, ImageError};
use crate::netsim::{NetError, NodeId, SimTime};

#[derive(Debug, thiserror::Error)]
pub enum AgencyError {
    #[error("node {0} is dead")]
    DeadNode(NodeId),
    #[error("{role} cannot {action} while {state}")]
    OutOfOrder {
        role: String,
        action: &'static str,
        state: &'static str,
    },
    #[error("no active nodes to fuse")]
    NoActiveNodes,
    #[error("node {0} is not on the itinerary")]
    NotInItinerary(NodeId),
    #[error("node {0} was already visited or skipped")]
    AlreadyVisited(NodeId),
    #[error("node {0} is unavailable: {1}")]
    Unavailable(NodeId, &'static str),
    #[error("unknown {what} {value:?}")]
    UnknownName { what: &'static str, value: String },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

pub type Result<T, E = AgencyError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContextKind {
    /// C_go
    GeneralObject,
    /// C_co
    CriticalObject,
    /// Sink-driven capture in the dark.
    Night,
}

impl fmt::Display for ContextKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContextKind::GeneralObject => "C_go",
            ContextKind::CriticalObject => "C_co",
            ContextKind::Night => "NIGHT",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContextRecord {
    pub kind: ContextKind,
    pub sensed_at: SimTime,
    pub source_node: NodeId,
}

/// Test deciding whether a node's scene changed enough to report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ActivityRule {
    /// Entropy of the difference image, as a percentage of the pixel bit
    /// depth, must exceed the threshold.
    #[default]
    DifferenceEntropy,
    /// `100·H(present)/H(previous)` must exceed the threshold.
    EntropyRatio,
}

impl fmt::Display for ActivityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActivityRule::DifferenceEntropy => "difference",
            ActivityRule::EntropyRatio => "ratio",
        })
    }
}

impl FromStr for ActivityRule {
    type Err = AgencyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "difference" => Ok(ActivityRule::DifferenceEntropy),
            "ratio" => Ok(ActivityRule::EntropyRatio),
            _ => Err(AgencyError::UnknownName {
                what: "activity rule",
                value: s.to_string(),
            }),
        }
    }
}

/// How a difference image is compared with a critical template.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TemplateMatch {
    Exact,
    /// Mean absolute difference at most this many gray levels.
    Tolerance(f64),
}

impl TemplateMatch {
    pub fn matches(self, difference: &Image, template: &Image) -> bool {
        if difference.same_shape(template).is_err() {
            return false;
        }
        match self {
            TemplateMatch::Exact => difference.pixels() == template.pixels(),
            TemplateMatch::Tolerance(tau) => {
                let total: u64 = difference
                    .pixels()
                    .iter()
                    .zip(template.pixels())
                    .map(|(&a, &b)| u64::from(a.abs_diff(b)))
                    .sum();
                total as f64 / difference.len() as f64 <= tau
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpretParams {
    /// Th, in percent.
    pub threshold_pct: f64,
    pub rule: ActivityRule,
    pub matching: TemplateMatch,
}

impl Default for InterpretParams {
    fn default() -> Self {
        InterpretParams {
            threshold_pct: 60.0,
            rule: ActivityRule::DifferenceEntropy,
            matching: TemplateMatch::Exact,
        }
    }
}

/// The two fusion profiles the sink chooses between.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSet {
    pub low: FusionProfile,
    pub high: FusionProfile,
    pub code_size_bytes: usize,
}

impl Default for ProfileSet {
    fn default() -> Self {
        ProfileSet {
            low: FusionProfile::low_resolution(),
            high: FusionProfile::high_resolution(),
            code_size_bytes: 4096,
        }
    }
}

/// Usage class charged for work done on behalf of a dispatch.
pub fn usage_class(trigger: DispatchTrigger) -> UsageClass {
    match trigger {
        DispatchTrigger::Context(ContextKind::GeneralObject) => UsageClass::DayNoncritical,
        DispatchTrigger::Context(ContextKind::CriticalObject) | DispatchTrigger::UserRequest => UsageClass::DayCritical,
        DispatchTrigger::Context(ContextKind::Night) => UsageClass::Night,
    }
}
