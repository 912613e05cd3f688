use std::collections::BTreeSet;

use super::blackboard::SinkBlackboard;
use super::fusing::{AgentPhase, FusingAgent};
use super::log::{AgentKind, AgentLog};
use super::{AgencyError, ContextKind, ProfileSet, Result};
use crate::netsim::{bfs_path, geo_route, NetworkTopology, NodeId, Position, SimTime};

/// Why the sink sends out a fusing agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DispatchTrigger {
    Context(ContextKind),
    UserRequest,
}

impl std::fmt::Display for DispatchTrigger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DispatchTrigger::Context(kind) => kind.fmt(f),
            DispatchTrigger::UserRequest => f.write_str("USER"),
        }
    }
}

/// The sink manager agent and its blackboard. At most one fusing agent is
/// out at a time.
#[derive(Clone, Debug)]
pub struct SinkManager {
    id: NodeId,
    pub location: Position,
    pub blackboard: SinkBlackboard,
    agent_out: bool,
    next_agent_id: u64,
}

impl SinkManager {
    pub fn new(id: NodeId, location: Position, available_bandwidth_bps: f64) -> Self {
        SinkManager {
            id,
            location,
            blackboard: SinkBlackboard::new(available_bandwidth_bps),
            agent_out: false,
            next_agent_id: 0,
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn agent_out(&self) -> bool {
        self.agent_out
    }

    pub(super) fn agent_returned(&mut self, visited: &BTreeSet<NodeId>) {
        for &id in visited {
            self.blackboard.mark_served(id);
        }
        self.agent_out = false;
    }
}

/// Greedy tour: repeatedly go to the closest unvisited stop, lowest id on
/// ties.
pub fn nearest_neighbor_itinerary(start: Position, stops: &[(NodeId, Position)]) -> Vec<NodeId> {
    let mut remaining: Vec<(NodeId, Position)> = stops.to_vec();
    let mut here = start;
    let mut order = Vec::with_capacity(stops.len());
    while !remaining.is_empty() {
        let (idx, _) = remaining
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| here.distance(a.1).total_cmp(&here.distance(b.1)).then(a.0.cmp(&b.0)))
            .expect("non-empty");
        let (id, pos) = remaining.swap_remove(idx);
        order.push(id);
        here = pos;
    }
    order
}

/// Greedy route with a fewest-hop fallback, and whether the fallback was
/// needed.
pub(super) fn route(topology: &NetworkTopology, from: NodeId, to: NodeId) -> Option<(Vec<NodeId>, bool)> {
    match geo_route(topology, from, to) {
        Ok(path) => Some((path, false)),
        Err(_) => bfs_path(topology, from, to).ok().map(|p| (p, true)),
    }
}

/// Sink manager: builds a fusing agent for the currently active nodes. A
/// general-object context gets the low-resolution profile; critical
/// objects, night captures and user requests get the high-resolution one.
pub fn sma_dispatch(
    sink: &mut SinkManager,
    trigger: DispatchTrigger,
    profiles: &ProfileSet,
    topology: &NetworkTopology,
    at: SimTime,
    log: &mut AgentLog,
) -> Result<FusingAgent> {
    if sink.agent_out {
        return Err(AgencyError::OutOfOrder {
            role: "sink".into(),
            action: "dispatch",
            state: "waiting for an agent",
        });
    }
    let stops: Vec<(NodeId, Position)> = sink
        .blackboard
        .active_nodes()
        .map(|r| (r.node_id, r.location))
        .collect();
    if stops.is_empty() {
        log.push(
            at,
            AgentKind::SinkManager,
            "dispatch-refused",
            sink.id,
            "no active nodes",
        );
        return Err(AgencyError::NoActiveNodes);
    }
    let itinerary = nearest_neighbor_itinerary(sink.location, &stops);
    let last = *itinerary.last().expect("non-empty itinerary");
    let reverse_route = route(topology, last, sink.id).map(|(p, _)| p).unwrap_or_default();
    let profile = match trigger {
        DispatchTrigger::Context(ContextKind::GeneralObject) => profiles.low.clone(),
        _ => profiles.high.clone(),
    };
    let id = sink.next_agent_id;
    sink.next_agent_id += 1;
    sink.agent_out = true;
    log.push(
        at,
        AgentKind::SinkManager,
        "dispatch",
        sink.id,
        format!(
            "agent={id} trigger={trigger} profile={} itinerary={:?}",
            profile.resolution, itinerary
        ),
    );
    Ok(FusingAgent {
        id,
        trigger,
        code_size_bytes: profiles.code_size_bytes,
        profile,
        itinerary,
        reverse_route,
        carried_image: None,
        visited: BTreeSet::new(),
        skipped: BTreeSet::new(),
        position: sink.id,
        home: sink.id,
        dispatched_at: at,
        phase: AgentPhase::Dispatched,
    })
}
