//! Discrete-event model of the sensor network: placement, radio range,
//! duty-cycled links, flooding, greedy geographic routing and packetized
//! transfers.

mod channel;
mod event;
mod routing;
mod topology;

pub use channel::{Channel, ChannelConfig, HopLedger, LossModel, TransmissionRecord};
pub use event::{Simulator, Trace, TraceEvent};
pub use routing::{bfs_path, flood, geo_route, FloodReport};
pub use topology::{build_topology, DutyCycle, NetworkTopology, Node, Position, TopologyParams};

use std::fmt;

/// Simulated time in microseconds.
pub type SimTime = u64;
pub type NodeId = usize;

pub const MICROS_PER_MS: SimTime = 1_000;
pub const MICROS_PER_HOUR: SimTime = 3_600_000_000;

pub fn ms(value: u64) -> SimTime {
    value * MICROS_PER_MS
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NetError {
    #[error("a network needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid network parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("greedy routing stuck at node {stuck} on the way to {destination}")]
    RoutingFailure { stuck: NodeId, destination: NodeId },
    #[error("no path from {from} to {to}")]
    Unreachable { from: NodeId, to: NodeId },
    #[error("nodes {from} and {to} are not in range of each other")]
    BrokenPath { from: NodeId, to: NodeId },
    #[error("empty path")]
    EmptyPath,
    #[error("payload must be at least one byte")]
    EmptyPayload,
    #[error("cannot schedule at {at} before the current time {now}")]
    TimeTravel { at: SimTime, now: SimTime },
}

pub type Result<T, E = NetError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PacketKind {
    ContextFlood,
    AgentMigration,
    FusedImage,
    Control,
}

impl PacketKind {
    /// Packets that count toward image throughput.
    pub fn carries_image(self) -> bool {
        matches!(self, PacketKind::AgentMigration | PacketKind::FusedImage)
    }
}

impl fmt::Display for PacketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PacketKind::ContextFlood => "context-flood",
            PacketKind::AgentMigration => "agent-migration",
            PacketKind::FusedImage => "fused-image",
            PacketKind::Control => "control",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packet {
    pub seq: u64,
    pub kind: PacketKind,
    pub payload_bytes: usize,
    pub src: NodeId,
    pub dst: Option<NodeId>,
    pub hop_count: usize,
}
