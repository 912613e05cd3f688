use std::collections::BTreeSet;

use super::log::{AgentKind, AgentLog};
use super::node::SensorNode;
use super::sink::{route, DispatchTrigger, SinkManager};
use super::{usage_class, AgencyError, NodeStatus, Result};
use crate::energy::{DebitOutcome, EnergyConfig};
use crate::fusion::{accumulate_fuse, FusionProfile};
use crate::imagecore::Image;
use crate::netsim::{Channel, NetError, NetworkTopology, NodeId, PacketKind, SimTime, TransmissionRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum AgentPhase {
    Dispatched,
    Visiting,
    Returned,
}

/// Mobile agent carrying fusion code and the running fused image.
#[derive(Clone, Debug)]
pub struct FusingAgent {
    pub id: u64,
    pub trigger: DispatchTrigger,
    pub code_size_bytes: usize,
    pub profile: FusionProfile,
    pub itinerary: Vec<NodeId>,
    /// Planned route from the last stop back to the sink.
    pub reverse_route: Vec<NodeId>,
    pub carried_image: Option<Image>,
    pub visited: BTreeSet<NodeId>,
    pub skipped: BTreeSet<NodeId>,
    /// Node currently hosting the agent.
    pub position: NodeId,
    pub home: NodeId,
    pub dispatched_at: SimTime,
    pub(super) phase: AgentPhase,
}

impl FusingAgent {
    pub fn has_returned(&self) -> bool {
        self.phase == AgentPhase::Returned
    }

    /// Bytes moved on each migration: code plus the carried image.
    pub fn payload_bytes(&self) -> usize {
        self.code_size_bytes + self.carried_image.as_ref().map_or(0, Image::size_bytes)
    }

    /// Itinerary stops neither visited nor skipped, in order.
    pub fn remaining(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.itinerary
            .iter()
            .copied()
            .filter(|id| !self.visited.contains(id) && !self.skipped.contains(id))
    }

    fn check_open(&self, action: &'static str) -> Result<()> {
        if self.phase == AgentPhase::Returned {
            return Err(AgencyError::OutOfOrder {
                role: format!("agent {}", self.id),
                action,
                state: "returned",
            });
        }
        Ok(())
    }

    fn check_pending(&self, id: NodeId) -> Result<()> {
        if !self.itinerary.contains(&id) {
            return Err(AgencyError::NotInItinerary(id));
        }
        if self.visited.contains(&id) || self.skipped.contains(&id) {
            return Err(AgencyError::AlreadyVisited(id));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Migration {
    pub route: Vec<NodeId>,
    /// Greedy routing failed and a fewest-hop path was used instead.
    pub fallback: bool,
    pub record: TransmissionRecord,
}

/// Moves the agent, with its code and carried image, to the next stop.
pub fn fa_migrate(
    agent: &mut FusingAgent,
    topology: &NetworkTopology,
    channel: &mut Channel,
    to: NodeId,
    at: SimTime,
    log: &mut AgentLog,
) -> Result<Migration> {
    agent.check_open("migrate")?;
    agent.check_pending(to)?;
    let from = agent.position;
    let (path, fallback) = route(topology, from, to).ok_or(NetError::Unreachable { from, to })?;
    let record = channel.transmit(topology, &path, agent.payload_bytes(), PacketKind::AgentMigration, at)?;
    agent.position = to;
    log.push(
        record.finished_at,
        AgentKind::FusingAgent,
        "migrate",
        to,
        format!(
            "agent={} from={from} hops={} packets={}/{}{}",
            agent.id,
            record.hops,
            record.packets_received,
            record.packets_sent,
            if fallback { " fallback-route" } else { "" }
        ),
    );
    Ok(Migration {
        route: path,
        fallback,
        record,
    })
}

/// Fuses the hosting node's capture into the carried image and charges the
/// node for the work.
pub fn fa_visit(
    agent: &mut FusingAgent,
    node: &mut SensorNode,
    at: SimTime,
    energy: &EnergyConfig,
    log: &mut AgentLog,
) -> Result<DebitOutcome> {
    agent.check_open("visit")?;
    let id = node.id();
    agent.check_pending(id)?;
    if agent.position != id {
        return Err(AgencyError::OutOfOrder {
            role: format!("agent {}", agent.id),
            action: "visit",
            state: "hosted elsewhere",
        });
    }
    if node.is_dead() {
        return Err(AgencyError::Unavailable(id, "battery exhausted"));
    }
    if node.blackboard.status != NodeStatus::Active {
        return Err(AgencyError::Unavailable(id, "not active"));
    }
    let image = node
        .blackboard
        .present_image
        .as_ref()
        .ok_or(AgencyError::Unavailable(id, "no capture"))?;
    let fused = match &agent.carried_image {
        None => image.clone(),
        Some(running) => accumulate_fuse(running, image, &agent.profile)?,
    };
    agent.carried_image = Some(fused);
    agent.visited.insert(id);
    agent.phase = AgentPhase::Visiting;
    let outcome = node.debit(usage_class(agent.trigger), at, energy)?;
    log.push(
        at,
        AgentKind::FusingAgent,
        "visit",
        id,
        format!("agent={} fused={}", agent.id, agent.visited.len()),
    );
    Ok(outcome)
}

/// Records that a stop could not be served.
pub fn fa_skip(agent: &mut FusingAgent, id: NodeId, reason: &str, at: SimTime, log: &mut AgentLog) -> Result<()> {
    agent.check_open("skip")?;
    agent.check_pending(id)?;
    agent.skipped.insert(id);
    log.push(
        at,
        AgentKind::FusingAgent,
        "skip",
        id,
        format!("agent={} active-node-failure: {reason}", agent.id),
    );
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ReturnOutcome {
    /// The fused image as delivered, if the agent had one and a route home
    /// existed.
    pub image: Option<Image>,
    pub record: Option<TransmissionRecord>,
    pub route: Vec<NodeId>,
    pub fallback: bool,
    pub delivered_at: SimTime,
}

/// Brings the agent home with the fused image and disposes of it.
pub fn fa_return(
    agent: &mut FusingAgent,
    sink: &mut SinkManager,
    topology: &NetworkTopology,
    channel: &mut Channel,
    at: SimTime,
    log: &mut AgentLog,
) -> Result<ReturnOutcome> {
    agent.check_open("return")?;
    if let Some(next) = agent.remaining().next() {
        return Err(AgencyError::OutOfOrder {
            role: format!("agent {}", agent.id),
            action: "return",
            state: if next == agent.position {
                "hosted at an unserved stop"
            } else {
                "stops remain"
            },
        });
    }
    let mut outcome = ReturnOutcome {
        image: None,
        record: None,
        route: Vec::new(),
        fallback: false,
        delivered_at: at,
    };
    if agent.carried_image.is_none() {
        log.push(
            at,
            AgentKind::FusingAgent,
            "return",
            agent.home,
            format!("agent={} empty-handed", agent.id),
        );
    } else {
        let planned = agent.reverse_route.first() == Some(&agent.position);
        let found = if planned {
            Some((agent.reverse_route.clone(), false))
        } else {
            route(topology, agent.position, agent.home)
        };
        match found {
            Some((path, fallback)) => {
                let record = channel.transmit(topology, &path, agent.payload_bytes(), PacketKind::FusedImage, at)?;
                outcome.delivered_at = record.finished_at;
                log.push(
                    record.finished_at,
                    AgentKind::FusingAgent,
                    "return",
                    agent.home,
                    format!(
                        "agent={} visited={} packets={}/{}",
                        agent.id,
                        agent.visited.len(),
                        record.packets_received,
                        record.packets_sent
                    ),
                );
                outcome.image = agent.carried_image.clone();
                outcome.record = Some(record);
                outcome.route = path;
                outcome.fallback = fallback;
            }
            None => {
                log.push(
                    at,
                    AgentKind::FusingAgent,
                    "return-failed",
                    agent.position,
                    format!("agent={} sink unreachable", agent.id),
                );
            }
        }
    }
    sink.agent_returned(&agent.visited);
    agent.phase = AgentPhase::Returned;
    log.push(
        outcome.delivered_at,
        AgentKind::SinkManager,
        "dispose",
        agent.home,
        format!("agent={}", agent.id),
    );
    Ok(outcome)
}
