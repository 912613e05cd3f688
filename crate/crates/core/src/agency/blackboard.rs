use std::collections::BTreeMap;

use super::ContextRecord;
use crate::imagecore::Image;
use crate::netsim::{NodeId, Position, SimTime};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NodeStatus {
    Active,
    #[default]
    Inactive,
}

/// Per-node knowledge store shared by the context and node manager agents.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeBlackboard {
    pub node_id: NodeId,
    pub location: Position,
    pub status: NodeStatus,
    pub battery_mv: f64,
    /// Difference-entropy signal strength, percent of the bit depth.
    pub signal_strength_pct: f64,
    /// `100·H(present)/H(previous)`, capped at 200.
    pub entropy_ratio_pct: f64,
    pub power_mw: f64,
    pub critical_images: Vec<Image>,
    pub present_image: Option<Image>,
    pub previous_image: Option<Image>,
    pub sensed_at: Option<SimTime>,
    pub available_bandwidth_bps: f64,
    /// Channel time needed to send the present image, percent of one second.
    pub bandwidth_required_pct: f64,
    pub context: Option<ContextRecord>,
}

impl NodeBlackboard {
    pub fn new(node_id: NodeId, location: Position, battery_mv: f64, available_bandwidth_bps: f64) -> Self {
        NodeBlackboard {
            node_id,
            location,
            status: NodeStatus::Inactive,
            battery_mv,
            signal_strength_pct: 0.0,
            entropy_ratio_pct: 0.0,
            power_mw: 0.0,
            critical_images: Vec::new(),
            present_image: None,
            previous_image: None,
            sensed_at: None,
            available_bandwidth_bps,
            bandwidth_required_pct: 0.0,
            context: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SinkRow {
    pub node_id: NodeId,
    pub location: Position,
    pub status: NodeStatus,
    pub signal_strength_pct: f64,
    pub battery_mv: f64,
    pub power_mw: f64,
    pub bandwidth_required_pct: f64,
    pub context: ContextRecord,
}

/// The sink's view of the network, one row per reporting node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SinkBlackboard {
    pub rows: BTreeMap<NodeId, SinkRow>,
    pub available_bandwidth_bps: f64,
}

impl SinkBlackboard {
    pub fn new(available_bandwidth_bps: f64) -> Self {
        SinkBlackboard {
            rows: BTreeMap::new(),
            available_bandwidth_bps,
        }
    }

    /// Inserts or replaces the row for `row.node_id`. A report older than
    /// the stored one is ignored; returns whether the row changed.
    pub fn upsert(&mut self, row: SinkRow) -> bool {
        if let Some(existing) = self.rows.get(&row.node_id) {
            if existing.context.sensed_at > row.context.sensed_at {
                return false;
            }
        }
        self.rows.insert(row.node_id, row);
        true
    }

    pub fn active_nodes(&self) -> impl Iterator<Item = &SinkRow> {
        self.rows.values().filter(|r| r.status == NodeStatus::Active)
    }

    pub fn mark_served(&mut self, id: NodeId) {
        if let Some(row) = self.rows.get_mut(&id) {
            row.status = NodeStatus::Inactive;
        }
    }
}
