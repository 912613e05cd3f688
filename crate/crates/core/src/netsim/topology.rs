use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{NetError, NodeId, Result, SimTime};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn distance(self, other: Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Listen/sleep radio schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DutyCycle {
    pub listen: SimTime,
    pub sleep: SimTime,
    pub phase: SimTime,
}

impl DutyCycle {
    pub fn always_on() -> Self {
        DutyCycle {
            listen: 1,
            sleep: 0,
            phase: 0,
        }
    }

    pub fn period(self) -> SimTime {
        self.listen + self.sleep
    }

    fn position(self, at: SimTime) -> SimTime {
        let p = i128::from(self.period());
        (i128::from(at) - i128::from(self.phase)).rem_euclid(p) as SimTime
    }

    pub fn is_awake(self, at: SimTime) -> bool {
        self.sleep == 0 || self.position(at) < self.listen
    }

    /// `at` itself when awake, otherwise the start of the next listen window.
    pub fn next_awake(self, at: SimTime) -> SimTime {
        if self.is_awake(at) {
            at
        } else {
            at + (self.period() - self.position(at))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub position: Position,
    pub duty: DutyCycle,
    /// Cleared once the battery is exhausted; dead nodes neither send nor
    /// receive.
    pub alive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopologyParams {
    pub width_m: f64,
    pub height_m: f64,
    pub num_nodes: usize,
    pub sink_position: Position,
    pub comm_radius_m: f64,
    pub propagation_beta: f64,
    pub tx_power_mw: f64,
    /// Minimum received power; `None` places it exactly at the power seen at
    /// distance `comm_radius_m`.
    pub rx_threshold_mw: Option<f64>,
    pub listen: SimTime,
    pub sleep: SimTime,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            width_m: 100.0,
            height_m: 200.0,
            num_nodes: 5,
            sink_position: Position { x: 0.0, y: 0.0 },
            comm_radius_m: 10.0,
            propagation_beta: 3.5,
            tx_power_mw: 14.2,
            rx_threshold_mw: None,
            listen: super::ms(100),
            sleep: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NetworkTopology {
    pub width_m: f64,
    pub height_m: f64,
    pub nodes: Vec<Node>,
    pub sink: NodeId,
    pub comm_radius_m: f64,
    pub propagation_beta: f64,
    pub tx_power_mw: f64,
    pub rx_threshold_mw: f64,
    neighbors: Vec<Vec<NodeId>>,
}

/// Places the sink (node 0) at its configured position and the remaining
/// nodes uniformly at random. Positions are drawn in id order, so growing
/// `num_nodes` under a fixed seed keeps the earlier placements.
pub fn build_topology(params: &TopologyParams, seed: u64) -> Result<NetworkTopology> {
    if params.num_nodes < 2 {
        return Err(NetError::TooFewNodes(params.num_nodes));
    }
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(NetError::InvalidParameter(format!("{name} must be positive, got {v}")))
        }
    };
    positive("area width", params.width_m)?;
    positive("area height", params.height_m)?;
    positive("comm radius", params.comm_radius_m)?;
    positive("propagation beta", params.propagation_beta)?;
    positive("tx power", params.tx_power_mw)?;
    if params.listen == 0 {
        return Err(NetError::InvalidParameter("listen period must be positive".into()));
    }
    let sink = params.sink_position;
    if !(0.0..=params.width_m).contains(&sink.x) || !(0.0..=params.height_m).contains(&sink.y) {
        return Err(NetError::InvalidParameter(format!(
            "sink position ({}, {}) outside the area",
            sink.x, sink.y
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phase_rng = ChaCha8Rng::seed_from_u64(seed);
    phase_rng.set_stream(1);
    let period = params.listen + params.sleep;
    let mut nodes = Vec::with_capacity(params.num_nodes);
    for id in 0..params.num_nodes {
        let position = if id == 0 {
            sink
        } else {
            Position {
                x: rng.gen_range(0.0..=params.width_m),
                y: rng.gen_range(0.0..=params.height_m),
            }
        };
        nodes.push(Node {
            id,
            position,
            duty: DutyCycle {
                listen: params.listen,
                sleep: params.sleep,
                phase: phase_rng.gen_range(0..period),
            },
            alive: true,
        });
    }

    let rx_threshold_mw = params
        .rx_threshold_mw
        .unwrap_or_else(|| received_power(params.tx_power_mw, params.comm_radius_m, params.propagation_beta));
    let mut topo = NetworkTopology {
        width_m: params.width_m,
        height_m: params.height_m,
        nodes,
        sink: 0,
        comm_radius_m: params.comm_radius_m,
        propagation_beta: params.propagation_beta,
        tx_power_mw: params.tx_power_mw,
        rx_threshold_mw,
        neighbors: Vec::new(),
    };
    topo.rebuild_links();
    topo.synchronize_clusters();
    Ok(topo)
}

fn received_power(tx_power_mw: f64, distance: f64, beta: f64) -> f64 {
    tx_power_mw / distance.powf(beta)
}

impl NetworkTopology {
    /// Builds a topology from explicit positions with always-on radios.
    /// Node 0 is the sink.
    pub fn from_positions(positions: &[Position], comm_radius_m: f64) -> Result<Self> {
        if positions.len() < 2 {
            return Err(NetError::TooFewNodes(positions.len()));
        }
        let beta = 2.0;
        let tx = 1.0;
        let mut topo = NetworkTopology {
            width_m: positions.iter().map(|p| p.x).fold(0.0, f64::max),
            height_m: positions.iter().map(|p| p.y).fold(0.0, f64::max),
            nodes: positions
                .iter()
                .enumerate()
                .map(|(id, &position)| Node {
                    id,
                    position,
                    duty: DutyCycle::always_on(),
                    alive: true,
                })
                .collect(),
            sink: 0,
            comm_radius_m,
            propagation_beta: beta,
            tx_power_mw: tx,
            rx_threshold_mw: received_power(tx, comm_radius_m, beta),
            neighbors: Vec::new(),
        };
        topo.rebuild_links();
        Ok(topo)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(id).ok_or(NetError::UnknownNode(id))
    }

    pub fn set_alive(&mut self, id: NodeId, alive: bool) -> Result<()> {
        self.nodes.get_mut(id).ok_or(NetError::UnknownNode(id))?.alive = alive;
        Ok(())
    }

    pub fn distance(&self, i: NodeId, j: NodeId) -> Result<f64> {
        Ok(self.node(i)?.position.distance(self.node(j)?.position))
    }

    /// Received power at `j` for a transmission from `i`; infinite when
    /// co-located.
    pub fn link_power_mw(&self, i: NodeId, j: NodeId) -> Result<f64> {
        let d = self.distance(i, j)?;
        Ok(if d == 0.0 {
            f64::INFINITY
        } else {
            received_power(self.tx_power_mw, d, self.propagation_beta)
        })
    }

    /// Geometric range test combined with the received-power threshold.
    pub fn in_range(&self, i: NodeId, j: NodeId) -> Result<bool> {
        let d = self.distance(i, j)?;
        Ok(d <= self.comm_radius_m && self.link_power_mw(i, j)? >= self.rx_threshold_mw)
    }

    /// In-range neighbors regardless of liveness, in id order.
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.neighbors[id]
    }

    pub fn live_neighbors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors[id].iter().copied().filter(|&n| self.nodes[n].alive)
    }

    fn rebuild_links(&mut self) {
        let n = self.nodes.len();
        self.neighbors = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && self.in_range(i, j).unwrap_or(false))
                    .collect()
            })
            .collect();
    }

    /// Component label of every node (the lowest id in its component).
    pub fn components(&self) -> Vec<NodeId> {
        let n = self.nodes.len();
        let mut label = vec![usize::MAX; n];
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = start;
            while let Some(u) = stack.pop() {
                for &v in &self.neighbors[u] {
                    if label[v] == usize::MAX {
                        label[v] = start;
                        stack.push(v);
                    }
                }
            }
        }
        label
    }

    /// Every node adopts the duty phase of the lowest-id node it can reach.
    fn synchronize_clusters(&mut self) {
        let labels = self.components();
        for (id, &root) in labels.iter().enumerate() {
            self.nodes[id].duty.phase = self.nodes[root].duty.phase;
        }
    }
}
