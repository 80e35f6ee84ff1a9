//! Node positions, waypoint motion, unit-disk connectivity, and packet
//! transmission with a fixed per-hop delay.
//!
//! Positions are evaluated lazily from closed-form motion plans, so
//! connectivity is exact at any instant; nothing is stepped or cached.

use crate::engine::{EventPayload, Scheduler, SimTime};
use crate::packet::{NodeId, Packet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        assert!(x.is_finite() && y.is_finite(), "non-finite coordinate");
        Position { x, y }
    }

    pub fn distance(self, other: Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One straight-line leg of a motion plan. The origin is wherever the
/// node is at `start`; arrival time is `start + distance / speed` and
/// the node stays at `to` afterwards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionLeg {
    pub start: SimTime,
    pub to: Position,
    /// Meters per second, > 0.
    pub speed: f64,
}

/// Initial position plus zero or more waypoint legs in start-time order.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionPlan {
    pub initial: Position,
    pub legs: Vec<MotionLeg>,
}

impl MotionPlan {
    pub fn stationary(at: Position) -> Self {
        MotionPlan {
            initial: at,
            legs: Vec::new(),
        }
    }

    pub fn position_at(&self, t: SimTime) -> Position {
        let mut pos = self.initial;
        for leg in &self.legs {
            if t <= leg.start {
                return pos;
            }
            let dist = pos.distance(leg.to);
            let travel = dist / leg.speed;
            let elapsed = (t - leg.start).as_secs_f64();
            if elapsed >= travel {
                pos = leg.to;
            } else {
                let frac = elapsed / travel;
                return Position {
                    x: pos.x + (leg.to.x - pos.x) * frac,
                    y: pos.y + (leg.to.y - pos.y) * frac,
                };
            }
        }
        pos
    }
}

/// Unit-disk radio: in range iff euclidean distance <= `range_m`
/// (boundary inclusive). Every hop costs the same fixed delay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadioModel {
    pub range_m: f64,
    pub hop_delay: SimTime,
}

impl RadioModel {
    pub fn new(range_m: f64, hop_delay: SimTime) -> Self {
        assert!(range_m > 0.0, "radio range must be positive");
        assert!(hop_delay > SimTime::ZERO, "hop delay must be positive");
        RadioModel { range_m, hop_delay }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dest {
    Broadcast,
    Unicast(NodeId),
}

/// Synchronous report from [`World::transmit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransmitOutcome {
    /// Broadcast scheduled arrivals at this many neighbors.
    Broadcast { receivers: usize },
    /// Unicast arrival scheduled.
    Sent,
    /// Unicast target out of range at send time; link-layer feedback to
    /// the sending protocol, no event scheduled.
    LinkFail,
}

#[derive(Clone, Debug)]
pub struct World {
    motions: Vec<MotionPlan>,
    pub radio: RadioModel,
}

impl World {
    pub fn new(motions: Vec<MotionPlan>, radio: RadioModel) -> Self {
        World { motions, radio }
    }

    pub fn node_count(&self) -> usize {
        self.motions.len()
    }

    pub fn position_at(&self, node: NodeId, t: SimTime) -> Position {
        self.motions
            .get(node)
            .unwrap_or_else(|| panic!("unknown node {node}"))
            .position_at(t)
    }

    pub fn in_range(&self, a: NodeId, b: NodeId, t: SimTime) -> bool {
        assert!(a != b, "a node is not its own neighbor");
        self.position_at(a, t).distance(self.position_at(b, t)) <= self.radio.range_m
    }

    /// Neighbor ids in ascending order.
    pub fn neighbors_of(&self, node: NodeId, t: SimTime) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&j| j != node && self.in_range(node, j, t))
            .collect()
    }

    /// Sends `packet` from `src` at the current scheduler time.
    ///
    /// Receiver membership is evaluated at send time only; each
    /// scheduled copy arrives one hop delay later with `hops_taken`
    /// incremented.
    pub fn transmit(
        &self,
        sched: &mut Scheduler,
        src: NodeId,
        dest: Dest,
        packet: &Packet,
    ) -> TransmitOutcome {
        let now = sched.now();
        let arrive_at = now + self.radio.hop_delay;
        match dest {
            Dest::Broadcast => {
                let neighbors = self.neighbors_of(src, now);
                let receivers = neighbors.len();
                for to in neighbors {
                    let mut copy = packet.clone();
                    copy.hops_taken += 1;
                    sched.schedule(
                        arrive_at,
                        EventPayload::PacketArrival {
                            to,
                            from: src,
                            packet: copy,
                        },
                    );
                }
                TransmitOutcome::Broadcast { receivers }
            }
            Dest::Unicast(to) => {
                if !self.in_range(src, to, now) {
                    return TransmitOutcome::LinkFail;
                }
                let mut copy = packet.clone();
                copy.hops_taken += 1;
                sched.schedule(
                    arrive_at,
                    EventPayload::PacketArrival {
                        to,
                        from: src,
                        packet: copy,
                    },
                );
                TransmitOutcome::Sent
            }
        }
    }
}
