//! Simulation of a context-aware visual sensor network: entropy-based change
//! detection on each node, wavelet-domain image fusion by a mobile agent,
//! and a discrete-event network and energy model to measure the cost.
//!
//! The modules build on each other in this order: [`imagecore`],
//! [`wavelet`], [`fusion`], [`netsim`], [`energy`], [`agency`],
//! [`scenario`].

pub mod agency;
pub mod energy;
pub mod fusion;
pub mod imagecore;
pub mod netsim;
pub mod scenario;
pub mod wavelet;

pub use agency::{ContextKind, ContextRecord, NodeStatus};
pub use energy::{EnergyState, UsageClass};
pub use fusion::{fuse_pair, FusionMode, FusionProfile, ResolutionClass};
pub use imagecore::{BitDepth, Image};
pub use netsim::{NodeId, Position, SimTime, TransmissionRecord};
pub use scenario::{run_scenario, MetricsReport, ScenarioConfig};
pub use wavelet::{Basis, SubbandPyramid};
