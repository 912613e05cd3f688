use std::collections::{BTreeMap, BTreeSet};

use super::topology::NetworkTopology;
use super::{NetError, NodeId, PacketKind, Result, SimTime};

#[derive(Clone, Debug, PartialEq)]
pub enum LossModel {
    /// Independent per-hop, per-packet loss with this probability. A draw
    /// is keyed by the epoch, the link, how often the link was used in the
    /// epoch, and the packet index, so reordering unrelated traffic leaves
    /// it unchanged.
    Bernoulli(f64),
    /// Exactly these `(transmission id, a, b)` draws are lost. For transfers
    /// `a` is the hop index and `b` the packet index; for floods they are
    /// the sender and receiver ids.
    Scripted(BTreeSet<(u64, usize, usize)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelConfig {
    pub bandwidth_bps: f64,
    pub packet_payload_bytes: usize,
    /// Fixed cost added once per hop after the last packet.
    pub per_hop_overhead: SimTime,
    pub loss: LossModel,
}

impl ChannelConfig {
    pub fn lossless() -> Self {
        ChannelConfig {
            bandwidth_bps: 4.0e6,
            packet_payload_bytes: 1024,
            per_hop_overhead: super::ms(1),
            loss: LossModel::Bernoulli(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_bps > 0.0 && self.bandwidth_bps.is_finite()) {
            return Err(NetError::InvalidParameter(format!(
                "bandwidth {} must be positive",
                self.bandwidth_bps
            )));
        }
        if self.packet_payload_bytes == 0 {
            return Err(NetError::InvalidParameter("packet payload must be positive".into()));
        }
        if let LossModel::Bernoulli(p) = self.loss {
            if !(0.0..=1.0).contains(&p) {
                return Err(NetError::InvalidParameter(format!(
                    "loss probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HopLedger {
    pub from: NodeId,
    pub to: NodeId,
    pub start: SimTime,
    pub attempted: usize,
    pub delivered: usize,
    pub dropped_asleep: usize,
    pub dropped_loss: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionRecord {
    pub id: u64,
    pub kind: PacketKind,
    pub path: Vec<NodeId>,
    pub payload_bytes: usize,
    /// m_al
    pub packets_per_payload: usize,
    /// hc
    pub hops: usize,
    pub packets_sent: usize,
    pub packets_received: usize,
    /// Which packets reached the end of the path.
    pub delivered: Vec<bool>,
    pub hop_ledger: Vec<HopLedger>,
    pub started_at: SimTime,
    pub finished_at: SimTime,
    pub t_load: usize,
}

impl TransmissionRecord {
    pub fn latency(&self) -> SimTime {
        self.finished_at - self.started_at
    }

    pub fn packets_dropped(&self) -> usize {
        self.packets_sent - self.packets_received
    }
}

/// Shared radio medium: timing, loss draws and transmission ids.
#[derive(Clone, Debug)]
pub struct Channel {
    config: ChannelConfig,
    seed: u64,
    next_id: u64,
    epoch: u64,
    link_uses: BTreeMap<(NodeId, NodeId), u64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Channel {
    pub fn new(config: ChannelConfig, seed: u64) -> Self {
        Channel {
            config,
            seed,
            next_id: 0,
            epoch: 0,
            link_uses: BTreeMap::new(),
        }
    }

    /// Starts a new epoch of loss draws and forgets link usage counts.
    pub fn begin_epoch(&mut self, epoch: u64) {
        self.epoch = epoch;
        self.link_uses.clear();
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.config
    }

    pub fn next_transmission_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// ⌈bytes / packet payload⌉
    pub fn packets_for(&self, bytes: usize) -> usize {
        bytes.div_ceil(self.config.packet_payload_bytes)
    }

    /// Serialization time of `bytes` on the link, rounded up to a microsecond.
    pub fn packet_airtime(&self, bytes: usize) -> SimTime {
        (bytes as f64 * 8.0 / self.config.bandwidth_bps * 1e6).ceil() as SimTime
    }

    fn bernoulli(&self, p: f64, key: &[u64]) -> bool {
        if p <= 0.0 {
            return false;
        }
        let mut h = splitmix64(self.seed ^ 0x5bd1_e995);
        for &k in key {
            h = splitmix64(h ^ k);
        }
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        u < p
    }

    /// Whether the flood copy `from -> to` of message `(origin, seq)`, sent
    /// as transmission `tx`, is lost.
    pub fn flood_loss(&self, tx: u64, origin: NodeId, seq: u64, from: NodeId, to: NodeId) -> bool {
        match &self.config.loss {
            LossModel::Bernoulli(p) => self.bernoulli(*p, &[1, self.epoch, origin as u64, seq, from as u64, to as u64]),
            LossModel::Scripted(lost) => lost.contains(&(tx, from, to)),
        }
    }

    fn hop_loss(&self, tx: u64, hop: usize, packet: usize, link: (NodeId, NodeId), use_index: u64) -> bool {
        match &self.config.loss {
            LossModel::Bernoulli(p) => self.bernoulli(
                *p,
                &[2, self.epoch, link.0 as u64, link.1 as u64, use_index, packet as u64],
            ),
            LossModel::Scripted(lost) => lost.contains(&(tx, hop, packet)),
        }
    }

    /// Store-and-forward transfer of `payload_bytes` along `path`. Each hop
    /// waits for the receiver's listen window, then sends the surviving
    /// packets back to back; a packet is lost if the receiver is asleep when
    /// it lands or the loss draw says so.
    pub fn transmit(
        &mut self,
        topology: &NetworkTopology,
        path: &[NodeId],
        payload_bytes: usize,
        kind: PacketKind,
        at: SimTime,
    ) -> Result<TransmissionRecord> {
        if path.is_empty() {
            return Err(NetError::EmptyPath);
        }
        if payload_bytes == 0 {
            return Err(NetError::EmptyPayload);
        }
        for w in path.windows(2) {
            if !topology.in_range(w[0], w[1])? {
                return Err(NetError::BrokenPath { from: w[0], to: w[1] });
            }
        }
        topology.node(path[0])?;
        let id = self.next_transmission_id();
        let m_al = self.packets_for(payload_bytes);
        let size_of = |k: usize| {
            if k + 1 < m_al {
                self.config.packet_payload_bytes
            } else {
                payload_bytes - self.config.packet_payload_bytes * (m_al - 1)
            }
        };
        let mut in_flight = vec![true; m_al];
        let mut ledger = Vec::with_capacity(path.len().saturating_sub(1));
        let mut t = at;
        for (hop, w) in path.windows(2).enumerate() {
            let receiver = &topology.nodes[w[1]];
            let start = if receiver.alive { receiver.duty.next_awake(t) } else { t };
            let mut entry = HopLedger {
                from: w[0],
                to: w[1],
                start,
                attempted: 0,
                delivered: 0,
                dropped_asleep: 0,
                dropped_loss: 0,
            };
            let uses = self.link_uses.entry((w[0], w[1])).or_insert(0);
            let use_index = *uses;
            *uses += 1;
            let mut clock = start;
            for (k, alive) in in_flight.iter_mut().enumerate() {
                if !*alive {
                    continue;
                }
                clock += self.packet_airtime(size_of(k));
                entry.attempted += 1;
                if !receiver.alive || !receiver.duty.is_awake(clock) {
                    entry.dropped_asleep += 1;
                    *alive = false;
                } else if self.hop_loss(id, hop, k, (w[0], w[1]), use_index) {
                    entry.dropped_loss += 1;
                    *alive = false;
                } else {
                    entry.delivered += 1;
                }
            }
            t = clock + self.config.per_hop_overhead;
            ledger.push(entry);
        }
        let hops = path.len() - 1;
        let received = in_flight.iter().filter(|&&d| d).count();
        Ok(TransmissionRecord {
            id,
            kind,
            path: path.to_vec(),
            payload_bytes,
            packets_per_payload: m_al,
            hops,
            packets_sent: m_al,
            packets_received: received,
            delivered: in_flight,
            hop_ledger: ledger,
            started_at: at,
            finished_at: t,
            t_load: m_al * hops,
        })
    }
}
