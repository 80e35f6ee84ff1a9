//! AODV-lite baseline: flooded RREQs with duplicate suppression, RREPs
//! along the reverse path, per-destination route tables with sequence
//! numbers, and link-layer-feedback invalidation.
//!
//! No HELLO beacons, RERR propagation, intermediate-node RREPs, or
//! route expiry. Without RERR an upstream node keeps using a stale
//! route, so after a downstream break packets drop at the break point
//! until the stale route happens to heal — the flood-and-breakage
//! behavior this baseline exists to exhibit. Only the flow origin
//! buffers packets and runs discovery; an intermediate node with no
//! usable route drops, as plain RFC 3561 forwarding does without local
//! repair.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::engine::SimTime;
use crate::metrics::DropReason;
use crate::packet::{NodeId, Packet, PacketKind};
use crate::sim::Ctx;
use crate::world::{Dest, TransmitOutcome};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AodvConfig {
    pub rreq_ttl: u32,
    /// Per-destination pending-buffer capacity in packets.
    pub buffer_capacity: usize,
    /// Minimum gap before a data arrival re-triggers a discovery whose
    /// reply never came back. Checked lazily; there is no retry timer.
    pub retry_interval: SimTime,
}

impl Default for AodvConfig {
    fn default() -> Self {
        AodvConfig {
            rreq_ttl: 16,
            buffer_capacity: 64,
            retry_interval: SimTime::from_millis(100),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RouteEntry {
    pub next_hop: NodeId,
    pub hop_count: u32,
    pub dst_seq: u64,
    pub valid: bool,
}

#[derive(Clone, Debug, Default)]
pub struct NodeState {
    routes: BTreeMap<NodeId, RouteEntry>,
    rreq_seen: BTreeSet<(NodeId, u64)>,
    buffers: BTreeMap<NodeId, VecDeque<Packet>>,
    /// Outstanding discovery per destination: when its RREQ went out.
    discovering: BTreeMap<NodeId, SimTime>,
    own_seq: u64,
    next_rreq_id: u64,
}

impl NodeState {
    /// Returns the valid entry for `dst`, or a miss.
    pub fn route_lookup(&self, dst: NodeId) -> Option<&RouteEntry> {
        self.routes.get(&dst).filter(|e| e.valid)
    }

    pub fn own_seq(&self) -> u64 {
        self.own_seq
    }

    /// Installs a route unless the table already holds a fresher one:
    /// a newer sequence number always wins, an equal one only with a
    /// smaller hop count.
    fn install_route(&mut self, dst: NodeId, entry: RouteEntry) {
        match self.routes.get(&dst) {
            Some(old)
                if old.valid
                    && (old.dst_seq > entry.dst_seq
                        || (old.dst_seq == entry.dst_seq && old.hop_count <= entry.hop_count)) => {}
            _ => {
                self.routes.insert(dst, entry);
            }
        }
    }

    fn invalidate(&mut self, dst: NodeId) {
        if let Some(e) = self.routes.get_mut(&dst) {
            e.valid = false;
        }
    }
}

pub fn on_data(
    state: &mut NodeState,
    ctx: &mut Ctx<'_>,
    cfg: &AodvConfig,
    me: NodeId,
    packet: Packet,
) {
    let now = ctx.sched.now();
    let dst = packet.final_dst;
    if me == dst {
        ctx.metrics
            .delivered(now, packet.uid, me, packet.hops_taken);
        return;
    }
    match state.route_lookup(dst).copied() {
        Some(entry) => {
            match ctx
                .world
                .transmit(ctx.sched, me, Dest::Unicast(entry.next_hop), &packet)
            {
                TransmitOutcome::Sent => ctx.stats.data_unicasts += 1,
                TransmitOutcome::LinkFail => {
                    state.invalidate(dst);
                    if me == packet.origin {
                        buffer_and_discover(state, ctx, cfg, me, packet);
                    } else {
                        ctx.metrics
                            .dropped(now, packet.uid, me, DropReason::LinkBreak);
                    }
                }
                TransmitOutcome::Broadcast { .. } => unreachable!(),
            }
        }
        None => {
            if me == packet.origin {
                buffer_and_discover(state, ctx, cfg, me, packet);
            } else {
                ctx.metrics
                    .dropped(now, packet.uid, me, DropReason::NoRoute);
            }
        }
    }
}

fn buffer_and_discover(
    state: &mut NodeState,
    ctx: &mut Ctx<'_>,
    cfg: &AodvConfig,
    me: NodeId,
    packet: Packet,
) {
    let now = ctx.sched.now();
    let dst = packet.final_dst;
    let uid = packet.uid;
    let buffer = state.buffers.entry(dst).or_default();
    buffer.push_back(packet);
    if buffer.len() > cfg.buffer_capacity {
        let oldest = buffer.pop_front().unwrap();
        ctx.metrics
            .dropped(now, oldest.uid, me, DropReason::BufferOverflow);
    }

    let retry_due = match state.discovering.get(&dst) {
        None => true,
        Some(&sent_at) => now.saturating_sub(sent_at) >= cfg.retry_interval,
    };
    if !retry_due {
        return;
    }
    state.own_seq += 1;
    let rreq_id = state.next_rreq_id;
    state.next_rreq_id += 1;
    // Never reprocess the echo of our own flood.
    state.rreq_seen.insert((me, rreq_id));
    state.discovering.insert(dst, now);
    let rreq = Packet {
        kind: PacketKind::Rreq {
            rreq_id,
            origin_seq: state.own_seq,
        },
        origin: me,
        final_dst: dst,
        uid,
        ttl: cfg.rreq_ttl,
        hops_taken: 0,
        payload_size: 0,
    };
    ctx.world.transmit(ctx.sched, me, Dest::Broadcast, &rreq);
    ctx.stats.rreq_broadcasts += 1;
}

pub fn on_rreq(state: &mut NodeState, ctx: &mut Ctx<'_>, me: NodeId, rreq: &Packet, from: NodeId) {
    let (rreq_id, origin_seq) = match rreq.kind {
        PacketKind::Rreq {
            rreq_id,
            origin_seq,
        } => (rreq_id, origin_seq),
        _ => unreachable!("on_rreq called with {:?}", rreq.kind),
    };
    if !state.rreq_seen.insert((rreq.origin, rreq_id)) {
        return;
    }
    state.install_route(
        rreq.origin,
        RouteEntry {
            next_hop: from,
            hop_count: rreq.hops_taken,
            dst_seq: origin_seq,
            valid: true,
        },
    );
    if me == rreq.final_dst {
        state.own_seq += 1;
        let rrep = Packet {
            kind: PacketKind::Rrep {
                route_dst: me,
                dst_seq: state.own_seq,
            },
            origin: me,
            final_dst: rreq.origin,
            uid: rreq.uid,
            ttl: rreq.hops_taken.max(1),
            hops_taken: 0,
            payload_size: 0,
        };
        // LinkFail means the reverse neighbor moved away; the reply is
        // lost and the originator retries on a later data packet.
        ctx.world
            .transmit(ctx.sched, me, Dest::Unicast(from), &rrep);
        ctx.stats.rrep_unicasts += 1;
        return;
    }
    if rreq.ttl == 0 {
        return;
    }
    let mut forward = rreq.clone();
    forward.ttl -= 1;
    ctx.world.transmit(ctx.sched, me, Dest::Broadcast, &forward);
    ctx.stats.rreq_broadcasts += 1;
}

pub fn on_rrep(
    state: &mut NodeState,
    ctx: &mut Ctx<'_>,
    cfg: &AodvConfig,
    me: NodeId,
    rrep: &Packet,
    from: NodeId,
) {
    let (route_dst, dst_seq) = match rrep.kind {
        PacketKind::Rrep { route_dst, dst_seq } => (route_dst, dst_seq),
        _ => unreachable!("on_rrep called with {:?}", rrep.kind),
    };
    state.install_route(
        route_dst,
        RouteEntry {
            next_hop: from,
            hop_count: rrep.hops_taken,
            dst_seq,
            valid: true,
        },
    );
    if me == rrep.final_dst {
        state.discovering.remove(&route_dst);
        flush_buffer(state, ctx, cfg, me, route_dst);
        return;
    }
    // Relay toward the originator along the stored reverse route. A
    // miss or link failure loses the RREP; discovery is retried by the
    // next data packet at the originator.
    if let Some(entry) = state.route_lookup(rrep.final_dst).copied() {
        ctx.world
            .transmit(ctx.sched, me, Dest::Unicast(entry.next_hop), rrep);
        ctx.stats.rrep_unicasts += 1;
    }
}

/// Drains buffered packets for `dst` in FIFO order while a valid route
/// holds; a failure mid-drain re-buffers through `on_data` and stops.
fn flush_buffer(
    state: &mut NodeState,
    ctx: &mut Ctx<'_>,
    cfg: &AodvConfig,
    me: NodeId,
    dst: NodeId,
) {
    loop {
        if state.route_lookup(dst).is_none() {
            return;
        }
        let Some(packet) = state.buffers.get_mut(&dst).and_then(VecDeque::pop_front) else {
            return;
        };
        on_data(state, ctx, cfg, me, packet);
    }
}
