use std::collections::{BTreeMap, HashSet, VecDeque};

use super::channel::Channel;
use super::topology::NetworkTopology;
use super::{NetError, NodeId, Packet, Result, SimTime};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FloodReport {
    /// Hop count at which each reached node first received the message.
    pub hops: BTreeMap<NodeId, usize>,
    /// First arrival instant per reached node.
    pub arrival: BTreeMap<NodeId, SimTime>,
    /// Broadcasts made, origin included; every reached node sends once.
    pub transmissions: usize,
    /// Per-neighbor copies put on the air.
    pub copies_sent: usize,
    pub copies_received: usize,
    /// Copies lost to a sleeping receiver.
    pub dropped_asleep: usize,
    pub dropped_loss: usize,
    /// Copies that reached a node already holding the message.
    pub duplicates: usize,
    /// Ordered `(forwarder, time)` log of broadcasts.
    pub forwards: Vec<(NodeId, SimTime)>,
}

impl FloodReport {
    pub fn reached(&self, id: NodeId) -> bool {
        self.hops.contains_key(&id)
    }
}

/// Breadth-first flood of `message` from `origin`. Each node rebroadcasts a
/// given `(origin, seq)` once; copies arriving at a sleeping or dead
/// neighbor, or lost on the channel, are dropped.
pub fn flood(
    topology: &NetworkTopology,
    channel: &mut Channel,
    origin: NodeId,
    message: &Packet,
    at: SimTime,
) -> Result<FloodReport> {
    topology.node(origin)?;
    let tx_id = channel.next_transmission_id();
    let mut seen: HashSet<(NodeId, u64)> = HashSet::new();
    let mut report = FloodReport::default();
    let airtime = channel.packet_airtime(message.payload_bytes) + channel.config().per_hop_overhead;
    let mut queue = VecDeque::new();
    seen.insert((origin, message.seq));
    report.hops.insert(origin, 0);
    report.arrival.insert(origin, at);
    queue.push_back((origin, at, 0usize));
    while let Some((u, t, h)) = queue.pop_front() {
        let sender = topology.node(u)?;
        if !sender.alive {
            continue;
        }
        let start = sender.duty.next_awake(t);
        report.transmissions += 1;
        report.forwards.push((u, start));
        let arrive = start + airtime;
        for v in topology.neighbors(u).iter().copied() {
            report.copies_sent += 1;
            let receiver = topology.node(v)?;
            if !receiver.alive || !receiver.duty.is_awake(arrive) {
                report.dropped_asleep += 1;
                continue;
            }
            if channel.flood_loss(tx_id, origin, message.seq, u, v) {
                report.dropped_loss += 1;
                continue;
            }
            report.copies_received += 1;
            if !seen.insert((v, message.seq)) {
                report.duplicates += 1;
                continue;
            }
            report.hops.insert(v, h + 1);
            report.arrival.insert(v, arrive);
            queue.push_back((v, arrive, h + 1));
        }
    }
    Ok(report)
}

/// Greedy geographic forwarding over live nodes: every hop moves to the
/// in-range neighbor closest to `to`, which must be strictly closer than the
/// current node.
pub fn geo_route(topology: &NetworkTopology, from: NodeId, to: NodeId) -> Result<Vec<NodeId>> {
    topology.node(from)?;
    let target = topology.node(to)?.position;
    let mut path = vec![from];
    let mut current = from;
    while current != to {
        let here = topology.nodes[current].position.distance(target);
        let best = topology
            .live_neighbors(current)
            .map(|n| (topology.nodes[n].position.distance(target), n))
            .filter(|&(d, _)| d < here)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        match best {
            Some((_, next)) => {
                path.push(next);
                current = next;
            }
            None => {
                return Err(NetError::RoutingFailure {
                    stuck: current,
                    destination: to,
                })
            }
        }
    }
    Ok(path)
}

/// Fewest-hop path over live nodes, lowest ids preferred.
pub fn bfs_path(topology: &NetworkTopology, from: NodeId, to: NodeId) -> Result<Vec<NodeId>> {
    topology.node(from)?;
    topology.node(to)?;
    let mut parent = vec![usize::MAX; topology.len()];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut c = to;
            while c != from {
                c = parent[c];
                path.push(c);
            }
            path.reverse();
            return Ok(path);
        }
        for v in topology.live_neighbors(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    Err(NetError::Unreachable { from, to })
}
