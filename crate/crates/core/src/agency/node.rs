use super::blackboard::{NodeBlackboard, NodeStatus, SinkRow};
use super::log::{AgentKind, AgentLog};
use super::sink::SinkManager;
use super::{ActivityRule, AgencyError, ContextKind, ContextRecord, InterpretParams, Result};
use crate::energy::{DebitOutcome, EnergyConfig, EnergyState, UsageClass};
use crate::imagecore::{difference, entropy, Image};
use crate::netsim::{flood, Channel, FloodReport, NetworkTopology, NodeId, Packet, PacketKind, Position, SimTime};

/// Size of a context report on the air.
pub const CONTEXT_REPORT_BYTES: usize = 64;

const RATIO_CAP_PCT: f64 = 200.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
enum NodePhase {
    #[default]
    Idle,
    Sensed,
    Active,
    Reported,
}

impl NodePhase {
    fn name(self) -> &'static str {
        match self {
            NodePhase::Idle => "idle",
            NodePhase::Sensed => "holding an uninterpreted capture",
            NodePhase::Active => "holding an unreported context",
            NodePhase::Reported => "reported",
        }
    }
}

/// A sensor with its blackboard, battery and protocol phase.
#[derive(Clone, Debug)]
pub struct SensorNode {
    pub blackboard: NodeBlackboard,
    pub energy: EnergyState,
    phase: NodePhase,
    report_seq: u64,
}

impl SensorNode {
    pub fn new(id: NodeId, location: Position, battery_mv: f64, available_bandwidth_bps: f64) -> Self {
        SensorNode {
            blackboard: NodeBlackboard::new(id, location, battery_mv, available_bandwidth_bps),
            energy: EnergyState::new(battery_mv),
            phase: NodePhase::Idle,
            report_seq: 0,
        }
    }

    pub fn id(&self) -> NodeId {
        self.blackboard.node_id
    }

    pub fn is_dead(&self) -> bool {
        self.energy.is_dead()
    }

    /// Charges one usage event and mirrors the result into the blackboard.
    pub fn debit(&mut self, class: UsageClass, at: SimTime, config: &EnergyConfig) -> Result<DebitOutcome> {
        let outcome = self.energy.debit(class, at, config)?;
        self.blackboard.battery_mv = self.energy.battery_mv;
        self.blackboard.power_mw = self.energy.draw_mw;
        if outcome.exhausted {
            self.blackboard.status = NodeStatus::Inactive;
        }
        Ok(outcome)
    }

    pub fn recharge(&mut self, from: SimTime, to: SimTime, config: &EnergyConfig) -> Result<f64> {
        let gain = self.energy.solar_recharge(from, to, config)?;
        self.blackboard.battery_mv = self.energy.battery_mv;
        Ok(gain)
    }

    fn out_of_order(&self, action: &'static str) -> AgencyError {
        AgencyError::OutOfOrder {
            role: format!("node {}", self.id()),
            action,
            state: self.phase.name(),
        }
    }
}

/// Context agent: stores a new capture and its timestamp, rotating the
/// last kept capture into `previous_image`, and charges the sensing cost.
pub fn ca_sense(
    node: &mut SensorNode,
    image: Image,
    at: SimTime,
    class: UsageClass,
    energy: &EnergyConfig,
    log: &mut AgentLog,
) -> Result<DebitOutcome> {
    if node.is_dead() {
        return Err(AgencyError::DeadNode(node.id()));
    }
    if !matches!(node.phase, NodePhase::Idle | NodePhase::Reported) {
        return Err(node.out_of_order("sense"));
    }
    let outcome = node.debit(class, at, energy)?;
    let bb = &mut node.blackboard;
    if let Some(kept) = bb.present_image.take() {
        bb.previous_image = Some(kept);
    }
    bb.bandwidth_required_pct = image.size_bits() as f64 / bb.available_bandwidth_bps * 100.0;
    bb.present_image = Some(image);
    bb.sensed_at = Some(at);
    bb.context = None;
    node.phase = NodePhase::Sensed;
    log.push(at, AgentKind::ContextAgent, "sense", node.id(), class.to_string());
    Ok(outcome)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interpretation {
    pub status: NodeStatus,
    pub signal_strength_pct: f64,
    pub entropy_ratio_pct: f64,
    pub context: Option<ContextRecord>,
}

/// Node manager: decides activity from the capture pair and classifies an
/// active change against the critical templates.
pub fn nma_interpret(node: &mut SensorNode, params: &InterpretParams, log: &mut AgentLog) -> Result<Interpretation> {
    if node.phase != NodePhase::Sensed {
        return Err(node.out_of_order("interpret"));
    }
    let id = node.id();
    let bb = &mut node.blackboard;
    let at = bb.sensed_at.expect("sensed phase has a timestamp");
    let present = bb.present_image.as_ref().expect("sensed phase holds a capture");
    let Some(previous) = bb.previous_image.as_ref() else {
        bb.previous_image = bb.present_image.take();
        bb.status = NodeStatus::Inactive;
        bb.signal_strength_pct = 0.0;
        bb.entropy_ratio_pct = 0.0;
        node.phase = NodePhase::Idle;
        log.push(
            at,
            AgentKind::NodeManager,
            "interpret",
            id,
            "first capture kept as reference",
        );
        return Ok(Interpretation {
            status: NodeStatus::Inactive,
            signal_strength_pct: 0.0,
            entropy_ratio_pct: 0.0,
            context: None,
        });
    };

    let diff = difference(present, previous)?;
    let bits = f64::from(present.depth().bits());
    let strength = 100.0 * entropy(&diff) / bits;
    let (h1, h2) = (entropy(present), entropy(previous));
    let ratio = if h2 == 0.0 {
        RATIO_CAP_PCT
    } else {
        (100.0 * h1 / h2).min(RATIO_CAP_PCT)
    };
    let score = match params.rule {
        ActivityRule::DifferenceEntropy => strength,
        ActivityRule::EntropyRatio => ratio,
    };
    bb.signal_strength_pct = strength;
    bb.entropy_ratio_pct = ratio;
    let detail = format!(
        "strength={strength:.3} ratio={ratio:.3}{}",
        if h2 == 0.0 { " (previous entropy zero)" } else { "" }
    );

    if score <= params.threshold_pct {
        bb.present_image = None;
        bb.status = NodeStatus::Inactive;
        bb.context = None;
        node.phase = NodePhase::Idle;
        log.push(
            at,
            AgentKind::NodeManager,
            "interpret",
            id,
            format!("inactive {detail}"),
        );
        return Ok(Interpretation {
            status: NodeStatus::Inactive,
            signal_strength_pct: strength,
            entropy_ratio_pct: ratio,
            context: None,
        });
    }

    let critical = bb.critical_images.iter().any(|c| params.matching.matches(&diff, c));
    let context = ContextRecord {
        kind: if critical {
            ContextKind::CriticalObject
        } else {
            ContextKind::GeneralObject
        },
        sensed_at: at,
        source_node: id,
    };
    bb.status = NodeStatus::Active;
    bb.context = Some(context);
    node.phase = NodePhase::Active;
    log.push(
        at,
        AgentKind::NodeManager,
        "interpret",
        id,
        format!("{} {detail}", context.kind),
    );
    Ok(Interpretation {
        status: NodeStatus::Active,
        signal_strength_pct: strength,
        entropy_ratio_pct: ratio,
        context: Some(context),
    })
}

/// Node manager: floods the context report; the sink blackboard row is
/// updated only if the flood reaches the sink.
pub fn nma_report(
    node: &mut SensorNode,
    sink: &mut SinkManager,
    topology: &NetworkTopology,
    channel: &mut Channel,
    at: SimTime,
    log: &mut AgentLog,
) -> Result<FloodReport> {
    if node.phase != NodePhase::Active {
        return Err(node.out_of_order("report"));
    }
    let id = node.id();
    let bb = &node.blackboard;
    let context = bb.context.expect("active phase carries a context");
    node.report_seq += 1;
    let packet = Packet {
        seq: node.report_seq,
        kind: PacketKind::ContextFlood,
        payload_bytes: CONTEXT_REPORT_BYTES,
        src: id,
        dst: Some(sink.id()),
        hop_count: 0,
    };
    let report = flood(topology, channel, id, &packet, at)?;
    if let Some(&arrival) = report.arrival.get(&sink.id()) {
        sink.blackboard.upsert(SinkRow {
            node_id: id,
            location: bb.location,
            status: NodeStatus::Active,
            signal_strength_pct: bb.signal_strength_pct,
            battery_mv: bb.battery_mv,
            power_mw: bb.power_mw,
            bandwidth_required_pct: bb.bandwidth_required_pct,
            context,
        });
        log.push(
            arrival,
            AgentKind::NodeManager,
            "report",
            id,
            format!("{} delivered", context.kind),
        );
    } else {
        log.push(
            at,
            AgentKind::NodeManager,
            "report",
            id,
            format!("{} sink unreachable", context.kind),
        );
    }
    node.phase = NodePhase::Reported;
    Ok(report)
}
