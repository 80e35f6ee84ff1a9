//! Run orchestration: wires the scheduler, world, traffic, metrics, and
//! the selected protocol into one deterministic single-threaded loop.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::aodv;
use crate::engine::{Event, EventPayload, RngStream, Scheduler, SimTime};
use crate::metrics::{self, BinRow, MetricsLog, Summary};
use crate::packet::{NodeId, Packet, PacketKind};
use crate::randwalk;
use crate::scenario::ScenarioConfig;
use crate::world::World;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Protocol {
    Randwalk,
    Aodv,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Randwalk => "randwalk",
            Protocol::Aodv => "aodv",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "randwalk" => Ok(Protocol::Randwalk),
            "aodv" => Ok(Protocol::Aodv),
            other => Err(format!(
                "unknown protocol '{other}' (expected randwalk or aodv)"
            )),
        }
    }
}

/// Control-plane transmission counters, kept per run.
#[derive(Clone, Debug, Default)]
pub struct TxStats {
    pub probe_broadcasts: u64,
    /// Sum of broadcast receiver counts over all probes.
    pub probe_receivers: u64,
    pub probe_replies: u64,
    pub data_unicasts: u64,
    /// Collect-timer firings, i.e. per-hop forwarding decisions.
    pub hop_decisions: u64,
    pub max_replies_per_probe: u64,
    pub rreq_broadcasts: u64,
    pub rrep_unicasts: u64,
    /// Random-branch next-hop choices `(node, chosen)` — counts only
    /// uniform picks, not direct-to-destination forwards.
    pub next_hop_tally: BTreeMap<(NodeId, NodeId), u64>,
}

impl TxStats {
    pub(crate) fn note_replies_for_probe(&mut self, replies: u64) {
        self.max_replies_per_probe = self.max_replies_per_probe.max(replies);
    }
}

/// Mutable simulation services handed to protocol handlers.
pub struct Ctx<'a> {
    pub sched: &'a mut Scheduler,
    pub world: &'a World,
    pub rng: &'a mut RngStream,
    pub metrics: &'a mut MetricsLog,
    pub stats: &'a mut TxStats,
    pub next_probe_id: &'a mut u64,
}

impl Ctx<'_> {
    pub fn fresh_probe_id(&mut self) -> u64 {
        let id = *self.next_probe_id;
        *self.next_probe_id += 1;
        id
    }
}

enum ProtoStates {
    Randwalk(Vec<randwalk::NodeState>),
    Aodv(Vec<aodv::NodeState>),
}

pub struct Simulation {
    config: ScenarioConfig,
    protocol: Protocol,
    sched: Scheduler,
    world: World,
    rng: RngStream,
    metrics: MetricsLog,
    stats: TxStats,
    proto: ProtoStates,
    next_uid: u64,
    next_probe_id: u64,
}

impl Simulation {
    pub fn new(config: ScenarioConfig, protocol: Protocol, seed: u64) -> Self {
        let world = config.world();
        let n = world.node_count();
        let proto = match protocol {
            Protocol::Randwalk => {
                ProtoStates::Randwalk((0..n).map(|_| randwalk::NodeState::default()).collect())
            }
            Protocol::Aodv => {
                ProtoStates::Aodv((0..n).map(|_| aodv::NodeState::default()).collect())
            }
        };
        let mut sim = Simulation {
            protocol,
            sched: Scheduler::new(),
            world,
            rng: RngStream::new(seed),
            metrics: MetricsLog::new(),
            stats: TxStats::default(),
            proto,
            next_uid: 0,
            next_probe_id: 0,
            config,
        };
        for (idx, stream) in sim.config.streams.iter().enumerate() {
            sim.sched
                .schedule(stream.start, EventPayload::TrafficInjection { stream: idx });
        }
        sim
    }

    /// Runs the whole scenario, including drain time, to completion.
    pub fn run(mut self) -> RunResult {
        let t_end = self.config.duration;
        while let Some(event) = self.sched.pop_due(t_end) {
            self.dispatch(event);
        }
        RunResult {
            summary: self.metrics.summary(),
            metrics: self.metrics,
            stats: self.stats,
            duration: self.config.duration,
        }
    }

    fn dispatch(&mut self, event: Event) {
        match event.payload {
            EventPayload::TrafficInjection { stream } => self.inject(stream),
            EventPayload::PacketArrival { to, from, packet } => self.arrival(to, from, packet),
            EventPayload::CollectTimer { node, probe_id } => self.collect_timer(node, probe_id),
        }
    }

    fn inject(&mut self, stream_idx: usize) {
        let stream = self.config.streams[stream_idx];
        let now = self.sched.now();
        // Chain the next injection of this stream while inside the
        // stream window.
        let next = now + stream.period();
        if next < stream.stop {
            self.sched
                .schedule(next, EventPayload::TrafficInjection { stream: stream_idx });
        }
        let uid = self.next_uid;
        self.next_uid += 1;
        let ttl = match self.protocol {
            Protocol::Randwalk => self.config.randwalk.max_ttl,
            // AODV-lite data packets have no hop budget of their own.
            Protocol::Aodv => u32::MAX,
        };
        let packet = Packet::data(stream.src, stream.dst, uid, ttl, stream.payload_size);
        self.metrics.injected(now, uid, stream.src, stream.dst);
        self.deliver_to_protocol(stream.src, packet, None);
    }

    fn arrival(&mut self, to: NodeId, from: NodeId, packet: Packet) {
        match packet.kind {
            PacketKind::Data => self.deliver_to_protocol(to, packet, Some(from)),
            PacketKind::Probe { .. } => {
                if let ProtoStates::Randwalk(_) = self.proto {
                    let mut ctx = Ctx {
                        sched: &mut self.sched,
                        world: &self.world,
                        rng: &mut self.rng,
                        metrics: &mut self.metrics,
                        stats: &mut self.stats,
                        next_probe_id: &mut self.next_probe_id,
                    };
                    randwalk::on_probe(&mut ctx, to, &packet, from);
                }
            }
            PacketKind::ProbeReply { .. } => {
                if let ProtoStates::Randwalk(states) = &mut self.proto {
                    randwalk::on_probe_reply(&mut states[to], &packet);
                }
            }
            PacketKind::Rreq { .. } => {
                if let ProtoStates::Aodv(states) = &mut self.proto {
                    let mut ctx = Ctx {
                        sched: &mut self.sched,
                        world: &self.world,
                        rng: &mut self.rng,
                        metrics: &mut self.metrics,
                        stats: &mut self.stats,
                        next_probe_id: &mut self.next_probe_id,
                    };
                    aodv::on_rreq(&mut states[to], &mut ctx, to, &packet, from);
                }
            }
            PacketKind::Rrep { .. } => {
                if let ProtoStates::Aodv(states) = &mut self.proto {
                    let mut ctx = Ctx {
                        sched: &mut self.sched,
                        world: &self.world,
                        rng: &mut self.rng,
                        metrics: &mut self.metrics,
                        stats: &mut self.stats,
                        next_probe_id: &mut self.next_probe_id,
                    };
                    aodv::on_rrep(
                        &mut states[to],
                        &mut ctx,
                        &self.config.aodv,
                        to,
                        &packet,
                        from,
                    );
                }
            }
        }
    }

    fn deliver_to_protocol(&mut self, node: NodeId, packet: Packet, prev_hop: Option<NodeId>) {
        let mut ctx = Ctx {
            sched: &mut self.sched,
            world: &self.world,
            rng: &mut self.rng,
            metrics: &mut self.metrics,
            stats: &mut self.stats,
            next_probe_id: &mut self.next_probe_id,
        };
        match &mut self.proto {
            ProtoStates::Randwalk(states) => randwalk::on_data(
                &mut states[node],
                &mut ctx,
                &self.config.randwalk,
                node,
                packet,
                prev_hop,
            ),
            ProtoStates::Aodv(states) => {
                aodv::on_data(&mut states[node], &mut ctx, &self.config.aodv, node, packet)
            }
        }
    }

    fn collect_timer(&mut self, node: NodeId, probe_id: u64) {
        let mut ctx = Ctx {
            sched: &mut self.sched,
            world: &self.world,
            rng: &mut self.rng,
            metrics: &mut self.metrics,
            stats: &mut self.stats,
            next_probe_id: &mut self.next_probe_id,
        };
        if let ProtoStates::Randwalk(states) = &mut self.proto {
            randwalk::on_collect_timer(
                &mut states[node],
                &mut ctx,
                &self.config.randwalk,
                node,
                probe_id,
            );
        }
    }
}

pub struct RunResult {
    pub metrics: MetricsLog,
    pub stats: TxStats,
    pub summary: Summary,
    pub duration: SimTime,
}

impl RunResult {
    pub fn bin_counts(&self, bin_width: SimTime) -> Vec<BinRow> {
        self.metrics.bin_counts(bin_width, self.duration)
    }
}

/// One independent run.
pub fn run_scenario(config: &ScenarioConfig, protocol: Protocol, seed: u64) -> RunResult {
    Simulation::new(config.clone(), protocol, seed).run()
}

/// Runs each seed independently and concatenates binned CSV rows in
/// `(protocol, seed, bin)` order. Returns the CSV (with header) plus one
/// conservation summary per run.
pub fn run_to_csv(
    config: &ScenarioConfig,
    protocol: Protocol,
    seeds: &[u64],
    bin_width: SimTime,
) -> (String, Vec<(u64, Summary)>) {
    let mut csv = String::from(metrics::CSV_HEADER);
    csv.push('\n');
    let mut summaries = Vec::new();
    for &seed in seeds {
        let result = run_scenario(config, protocol, seed);
        metrics::write_csv_rows(
            &mut csv,
            protocol.name(),
            seed,
            &result.bin_counts(bin_width),
        );
        summaries.push((seed, result.summary));
    }
    (csv, summaries)
}
