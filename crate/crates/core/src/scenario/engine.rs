//! Round-by-round scenario execution.
//!
//! Round 0 at 00:00 is a reference capture. Every scheduled round then
//! senses on all live sensors, floods reports from active ones, and
//! dispatches one fusing agent over the reported nodes.

use std::collections::BTreeMap;

use super::metrics::{agent_overhead, bandwidth_required, dropping_rate, throughput, MetricsReport};
use super::{ImageFeed, Result, ScenarioConfig};
use crate::agency::{
    ca_sense, fa_migrate, fa_return, fa_skip, fa_visit, nma_interpret, nma_report, sma_dispatch, usage_class,
    AgencyError, AgentKind, AgentLog, ContextKind, DispatchTrigger, FusingAgent, InterpretParams, NodeStatus,
    ProfileSet, SensorNode, SinkManager,
};
use crate::energy::{DebitOutcome, EnergyConfig, UsageClass};
use crate::fusion::ResolutionClass;
use crate::imagecore::{error_measure, requantize};
use crate::netsim::{
    bfs_path, build_topology, geo_route, Channel, NetworkTopology, NodeId, PacketKind, SimTime, Simulator, Trace,
    TransmissionRecord, MICROS_PER_MS,
};

/// Size of the low-battery notice sent to the sink.
const CONTROL_BYTES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatterySample {
    pub at: SimTime,
    pub node: NodeId,
    pub battery_mv: f64,
    pub draw_mw: f64,
    /// Packets this node has put on the air so far.
    pub packets_sent: u64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: ScenarioConfig,
    pub metrics: MetricsReport,
    pub battery: Vec<BatterySample>,
    pub trace: Trace,
    pub log: AgentLog,
}

/// Runs `config` on its configured image feed.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput> {
    config.validate()?;
    let feed = match &config.image_feed {
        super::FeedSource::Synthetic => ImageFeed::synthetic(config, config.seed),
        super::FeedSource::Directory(dir) => ImageFeed::load(dir)?,
    };
    run_with_feed(config, &feed)
}

#[derive(Default)]
struct Counters {
    sent: u64,
    received: u64,
    image_sent: u64,
    image_received: u64,
    t_load: u64,
    reports_sent: u64,
    reports_delivered: u64,
    active: u64,
    agents: u64,
    delivered_agents: u64,
    visited: u64,
    fusion_ms: Vec<(ResolutionClass, f64)>,
    overhead: Vec<f64>,
    errors: Vec<(f64, f64)>,
}

/// Packets that travel with the agent until it returns: the agent code
/// from the sink, and each visited node's image. A packet counts as
/// received only if it survives every remaining leg.
struct Tracked {
    code: bool,
    intact: Vec<bool>,
}

struct Engine<'a> {
    config: &'a ScenarioConfig,
    feed: &'a ImageFeed,
    energy: EnergyConfig,
    interpret: InterpretParams,
    profiles: ProfileSet,
    topology: NetworkTopology,
    channel: Channel,
    sink: SinkManager,
    nodes: BTreeMap<NodeId, SensorNode>,
    packets_by_node: BTreeMap<NodeId, u64>,
    log: AgentLog,
    trace: Trace,
    battery: Vec<BatterySample>,
    counters: Counters,
    last_round_at: SimTime,
    low_battery: Vec<(NodeId, SimTime)>,
}

/// Runs `config` on an explicit feed.
pub fn run_with_feed(config: &ScenarioConfig, feed: &ImageFeed) -> Result<RunOutput> {
    config.validate()?;
    feed.check_covers(config)?;
    let mut engine = Engine::new(config, feed)?;

    let mut sim: Simulator<usize> = Simulator::new();
    sim.schedule(0, 0)?;
    let schedule = config.schedule();
    for (k, &at) in schedule.iter().enumerate() {
        sim.schedule(at, k + 1)?;
    }
    let end = *schedule.last().expect("validated schedule is non-empty");
    let mut failure = None;
    sim.advance(end, |_, at, round| {
        if failure.is_none() {
            if let Err(e) = engine.round(round, at) {
                failure = Some(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(engine.finish())
}

fn route(topology: &NetworkTopology, from: NodeId, to: NodeId) -> Option<Vec<NodeId>> {
    geo_route(topology, from, to)
        .or_else(|_| bfs_path(topology, from, to))
        .ok()
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = v.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

impl<'a> Engine<'a> {
    fn new(config: &'a ScenarioConfig, feed: &'a ImageFeed) -> Result<Self> {
        let topology = build_topology(&config.topology_params(), config.seed)?;
        let channel = Channel::new(config.channel_config(), config.seed ^ 0x00C4_A77E);
        let sink_id = topology.sink;
        let sink = SinkManager::new(sink_id, topology.nodes[sink_id].position, config.net_bandwidth_bps);
        let mut nodes = BTreeMap::new();
        let mut battery = Vec::new();
        for node in &topology.nodes {
            if node.id == sink_id {
                continue;
            }
            let mut sensor = SensorNode::new(node.id, node.position, config.node_battery_mv, config.net_bandwidth_bps);
            sensor.blackboard.critical_images = feed.templates.clone();
            battery.push(BatterySample {
                at: 0,
                node: node.id,
                battery_mv: config.node_battery_mv,
                draw_mw: 0.0,
                packets_sent: 0,
            });
            nodes.insert(node.id, sensor);
        }
        Ok(Engine {
            config,
            feed,
            energy: config.energy_config(),
            interpret: InterpretParams {
                threshold_pct: config.threshold_pct,
                rule: config.activity_rule,
                matching: config.template_match,
            },
            profiles: ProfileSet {
                low: config.low_profile(),
                high: config.high_profile(),
                code_size_bytes: config.f_code_bytes,
            },
            topology,
            channel,
            sink,
            packets_by_node: nodes.keys().map(|&id| (id, 0)).collect(),
            nodes,
            log: AgentLog::default(),
            trace: Trace::default(),
            battery,
            counters: Counters::default(),
            last_round_at: 0,
            low_battery: Vec::new(),
        })
    }

    fn round_class(&self, at: SimTime) -> UsageClass {
        if self.config.night_window().contains(at) {
            UsageClass::Night
        } else {
            UsageClass::DayNoncritical
        }
    }

    fn processing_delay(&self, pixels: usize, resolution: ResolutionClass) -> SimTime {
        let factor = match resolution {
            ResolutionClass::Low => 1.0,
            ResolutionClass::High => self.config.high_processing_factor,
        };
        (pixels as f64 * self.config.processing_us_per_pixel * factor).round() as SimTime
    }

    /// Records a debit's side effects: battery sample, low-battery notice,
    /// death.
    fn after_debit(&mut self, id: NodeId, at: SimTime, outcome: DebitOutcome) -> Result<()> {
        let node = &self.nodes[&id];
        self.battery.push(BatterySample {
            at,
            node: id,
            battery_mv: node.energy.battery_mv,
            draw_mw: node.energy.draw_mw,
            packets_sent: self.packets_by_node[&id],
        });
        if outcome.crossed_low && !outcome.exhausted {
            self.low_battery.push((id, at));
        }
        if outcome.exhausted {
            self.topology.set_alive(id, false)?;
            self.trace
                .push(at, "battery-exhausted", Some(id), None, 0, "node removed");
            self.log
                .push(at, AgentKind::NodeManager, "exhausted", id, "battery at zero");
        }
        Ok(())
    }

    /// Charges a transmitting node; the sink runs on mains power.
    fn charge_sender(&mut self, id: NodeId, packets: u64, class: UsageClass, at: SimTime) -> Result<()> {
        let Some(node) = self.nodes.get_mut(&id) else {
            return Ok(());
        };
        *self.packets_by_node.get_mut(&id).expect("sensor has a counter") += packets;
        if node.is_dead() {
            return Ok(());
        }
        let outcome = node.debit(class, at, &self.energy)?;
        self.after_debit(id, at, outcome)
    }

    fn charge_transmission(&mut self, record: &TransmissionRecord, class: UsageClass) -> Result<()> {
        self.counters.t_load += record.t_load as u64;
        for hop in &record.hop_ledger {
            self.trace.push(
                hop.start,
                record.kind.to_string(),
                Some(hop.from),
                Some(hop.to),
                record.payload_bytes,
                format!(
                    "tx={} delivered={}/{} asleep={} lost={}",
                    record.id, hop.delivered, hop.attempted, hop.dropped_asleep, hop.dropped_loss
                ),
            );
            self.charge_sender(hop.from, hop.attempted as u64, class, hop.start)?;
        }
        Ok(())
    }

    /// Sends queued low-battery notices, including any raised while
    /// relaying earlier notices.
    fn flush_low_battery(&mut self, class: UsageClass) -> Result<()> {
        while !self.low_battery.is_empty() {
            let (id, at) = self.low_battery.remove(0);
            self.log
                .push(at, AgentKind::NodeManager, "low-battery", id, "notify sink");
            let sink = self.sink.id();
            let Some(path) = route(&self.topology, id, sink) else {
                self.counters.sent += 1;
                self.trace
                    .push(at, "control", Some(id), Some(sink), CONTROL_BYTES, "no route");
                continue;
            };
            let record = self
                .channel
                .transmit(&self.topology, &path, CONTROL_BYTES, PacketKind::Control, at)?;
            self.counters.sent += record.packets_sent as u64;
            self.counters.received += record.packets_received as u64;
            self.charge_transmission(&record, class)?;
        }
        Ok(())
    }

    fn round(&mut self, round: usize, at: SimTime) -> Result<()> {
        let class = self.round_class(at);
        self.channel.begin_epoch(round as u64);
        let ids: Vec<NodeId> = self.nodes.keys().copied().collect();
        for &id in &ids {
            self.nodes
                .get_mut(&id)
                .expect("known id")
                .recharge(self.last_round_at, at, &self.energy)?;
        }
        self.last_round_at = at;

        let mut active = Vec::new();
        let mut report_at = at;
        for &id in &ids {
            if self.nodes[&id].is_dead() {
                continue;
            }
            let frame = self.feed.frame(round, id)?.clone();
            report_at = report_at.max(at + self.processing_delay(frame.len(), ResolutionClass::Low));
            let node = self.nodes.get_mut(&id).expect("known id");
            let outcome = ca_sense(node, frame, at, class, &self.energy, &mut self.log)?;
            self.after_debit(id, at, outcome)?;
            let node = self.nodes.get_mut(&id).expect("known id");
            if node.is_dead() {
                continue;
            }
            let verdict = nma_interpret(node, &self.interpret, &mut self.log)?;
            if verdict.status == NodeStatus::Active {
                active.push(id);
            }
        }
        self.counters.active += active.len() as u64;
        self.flush_low_battery(class)?;
        if round == 0 {
            return Ok(());
        }

        let mut dispatch_at = report_at;
        for &id in &active {
            if self.nodes[&id].is_dead() {
                continue;
            }
            let node = self.nodes.get_mut(&id).expect("known id");
            let flood = nma_report(
                node,
                &mut self.sink,
                &self.topology,
                &mut self.channel,
                report_at,
                &mut self.log,
            )?;
            let reached = flood.reached(self.sink.id());
            self.counters.reports_sent += 1;
            self.counters.sent += 1;
            if reached {
                self.counters.reports_delivered += 1;
                self.counters.received += 1;
                dispatch_at = dispatch_at.max(flood.arrival[&self.sink.id()]);
            }
            for &(u, t) in &flood.forwards {
                self.trace.push(
                    t,
                    PacketKind::ContextFlood.to_string(),
                    Some(u),
                    None,
                    crate::agency::CONTEXT_REPORT_BYTES,
                    format!("origin={id} sink={}", if reached { "reached" } else { "missed" }),
                );
                self.charge_sender(u, 1, class, t)?;
            }
        }
        self.flush_low_battery(class)?;

        let trigger = if class == UsageClass::Night {
            DispatchTrigger::Context(ContextKind::Night)
        } else if self
            .sink
            .blackboard
            .active_nodes()
            .any(|r| r.context.kind == ContextKind::CriticalObject)
        {
            DispatchTrigger::Context(ContextKind::CriticalObject)
        } else {
            DispatchTrigger::Context(ContextKind::GeneralObject)
        };
        match sma_dispatch(
            &mut self.sink,
            trigger,
            &self.profiles,
            &self.topology,
            dispatch_at,
            &mut self.log,
        ) {
            Ok(agent) => self.run_agent(agent, round, dispatch_at),
            Err(AgencyError::NoActiveNodes) => Ok(()),
            Err(e) => Err(e.into()),
        }
    }

    /// Marks tracked packets lost on one leg of the agent's journey. Image
    /// packets lead each payload; code packets follow.
    fn age(&self, tracked: &mut [Tracked], record: &TransmissionRecord, code_bytes: usize) {
        let code_packets = self.channel.packets_for(code_bytes).min(record.packets_per_payload);
        let image_packets = record.packets_per_payload - code_packets;
        for t in tracked.iter_mut() {
            let (offset, span) = if t.code {
                (image_packets, code_packets)
            } else {
                (0, image_packets)
            };
            for (j, ok) in t.intact.iter_mut().enumerate() {
                *ok &= span > 0 && record.delivered[offset + j % span];
            }
        }
    }

    fn run_agent(&mut self, mut agent: FusingAgent, round: usize, start: SimTime) -> Result<()> {
        self.counters.agents += 1;
        let class = usage_class(agent.trigger);
        let code = agent.code_size_bytes;
        let resolution = agent.profile.resolution;
        let mut tracked = vec![Tracked {
            code: true,
            intact: vec![true; self.channel.packets_for(code)],
        }];
        let mut t = start;
        loop {
            let Some(next) = agent.remaining().next() else { break };
            let migration = match fa_migrate(&mut agent, &self.topology, &mut self.channel, next, t, &mut self.log) {
                Ok(m) => m,
                Err(AgencyError::Net(e)) => {
                    fa_skip(&mut agent, next, &e.to_string(), t, &mut self.log)?;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            t = migration.record.finished_at;
            self.age(&mut tracked, &migration.record, code);
            self.charge_transmission(&migration.record, class)?;
            self.flush_low_battery(class)?;

            let node = self.nodes.get_mut(&next).expect("itinerary holds sensors");
            let pixels = node.blackboard.present_image.as_ref().map_or(0, |i| i.len());
            let image_bytes = node.blackboard.present_image.as_ref().map_or(0, |i| i.size_bytes());
            match fa_visit(&mut agent, node, t, &self.energy, &mut self.log) {
                Ok(outcome) => {
                    self.counters.visited += 1;
                    self.after_debit(next, t, outcome)?;
                    let packets = self.channel.packets_for(image_bytes);
                    self.counters.image_sent += packets as u64;
                    tracked.push(Tracked {
                        code: false,
                        intact: vec![true; packets],
                    });
                    t += self.processing_delay(pixels, resolution);
                    self.flush_low_battery(class)?;
                }
                Err(AgencyError::Unavailable(_, why)) => fa_skip(&mut agent, next, why, t, &mut self.log)?,
                Err(e) => return Err(e.into()),
            }
        }

        let skipped: Vec<NodeId> = agent.skipped.iter().copied().collect();
        let outcome = fa_return(
            &mut agent,
            &mut self.sink,
            &self.topology,
            &mut self.channel,
            t,
            &mut self.log,
        )?;
        for id in skipped {
            self.sink.blackboard.mark_served(id);
        }
        match (&outcome.record, &outcome.image) {
            (Some(record), Some(image)) => {
                self.age(&mut tracked, record, code);
                self.charge_transmission(record, class)?;
                self.counters.delivered_agents += 1;
                let elapsed = (outcome.delivered_at - agent.dispatched_at) as f64 / MICROS_PER_MS as f64;
                self.counters.fusion_ms.push((resolution, elapsed));
                self.counters
                    .overhead
                    .push(agent_overhead(image.size_bytes(), code)?.agent_fraction);
                if let Some(truth) = self.feed.truth(round) {
                    let fused = requantize(image, truth.depth());
                    if let Ok(e) = error_measure(truth, &fused) {
                        self.counters.errors.push((e.std_of_difference, e.mean_squared_error));
                    }
                }
            }
            _ => {
                for t in &mut tracked {
                    t.intact.iter_mut().for_each(|ok| *ok = false);
                }
            }
        }
        for t in &tracked {
            let intact = t.intact.iter().filter(|&&ok| ok).count() as u64;
            if t.code {
                self.counters.sent += t.intact.len() as u64;
                self.counters.received += intact;
            } else {
                self.counters.image_received += intact;
            }
        }
        self.flush_low_battery(class)
    }

    fn finish(self) -> RunOutput {
        let c = &self.counters;
        let config = self.config;
        let sent = c.sent + c.image_sent;
        let received = c.received + c.image_received;
        let frame = self
            .feed
            .frame(0, *self.nodes.keys().next().expect("at least one sensor"))
            .expect("covered");
        let bw_s = bandwidth_required(frame.size_bits(), config.net_bandwidth_bps).unwrap_or(f64::NAN);
        let overhead = if c.overhead.is_empty() {
            agent_overhead(frame.size_bytes(), config.f_code_bytes).map_or(f64::NAN, |o| o.agent_fraction)
        } else {
            mean(c.overhead.iter().copied())
        };
        let power = |class: UsageClass| {
            mean(self.nodes.values().flat_map(|n| {
                n.energy
                    .usage_log
                    .iter()
                    .filter(move |u| u.class == class)
                    .map(|u| self.energy.power(u.class))
            }))
        };
        let metrics = MetricsReport {
            dropping_rate: dropping_rate(sent, received).unwrap_or(f64::NAN),
            throughput: throughput(c.image_sent, c.image_received).unwrap_or(f64::NAN),
            bandwidth_required_s: bw_s,
            bandwidth_required_pct: bw_s * 100.0,
            fusion_time_ms: mean(c.fusion_ms.iter().map(|&(_, ms)| ms)),
            fusion_time_low_ms: mean(c.fusion_ms.iter().filter(|f| f.0 == ResolutionClass::Low).map(|f| f.1)),
            fusion_time_high_ms: mean(c.fusion_ms.iter().filter(|f| f.0 == ResolutionClass::High).map(|f| f.1)),
            agent_overhead: overhead,
            overhead_literal: 1.0 - overhead,
            error_std: mean(c.errors.iter().map(|e| e.0)),
            error_mse: mean(c.errors.iter().map(|e| e.1)),
            t_load_total: c.t_load,
            packets_sent: sent,
            packets_received: received,
            image_packets_sent: c.image_sent,
            image_packets_received: c.image_received,
            reports_sent: c.reports_sent,
            reports_delivered: c.reports_delivered,
            active_interpretations: c.active,
            agents_dispatched: c.agents,
            agents_delivered: c.delivered_agents,
            nodes_visited: c.visited,
            power_day_noncritical_mw: power(UsageClass::DayNoncritical),
            power_day_critical_mw: power(UsageClass::DayCritical),
            power_night_mw: power(UsageClass::Night),
            dead_nodes: self.nodes.values().filter(|n| n.is_dead()).count() as u64,
            mean_battery_mv: mean(self.nodes.values().map(|n| n.energy.battery_mv)),
        };
        RunOutput {
            config: config.clone(),
            metrics,
            battery: self.battery,
            trace: self.trace,
            log: self.log,
        }
    }
}
