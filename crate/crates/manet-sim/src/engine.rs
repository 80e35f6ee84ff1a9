//! Deterministic event scheduler and seeded random source.
//!
//! Simulation time is fixed-point with microsecond resolution so that
//! equal-time comparisons and event ordering are identical on every
//! platform. Events at the same instant dispatch in insertion order.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use crate::packet::{NodeId, Packet};

/// Simulation time in whole microseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000)
    }

    /// Rounds to the nearest microsecond.
    pub fn from_secs_f64(secs: f64) -> Self {
        assert!(
            secs.is_finite() && secs >= 0.0,
            "time must be finite and non-negative, got {secs}"
        );
        SimTime((secs * 1e6).round() as u64)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e6
    }

    pub fn saturating_sub(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.checked_sub(rhs.0).expect("SimTime underflow"))
    }
}

impl fmt::Display for SimTime {
    /// Fixed-point seconds with six decimals, e.g. `1.250000`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:06}", self.0 / 1_000_000, self.0 % 1_000_000)
    }
}

/// What happens when an event fires.
#[derive(Clone, Debug)]
pub enum EventPayload {
    /// A packet reaches `to`, having been sent by `from`.
    PacketArrival {
        to: NodeId,
        from: NodeId,
        packet: Packet,
    },
    /// A probe-reply collection window closes at `node`.
    CollectTimer { node: NodeId, probe_id: u64 },
    /// A CBR stream injects its next packet at the stream source.
    TrafficInjection { stream: usize },
}

#[derive(Clone, Debug)]
pub struct Event {
    pub fire_at: SimTime,
    pub seq: u64,
    pub payload: EventPayload,
}

/// Handle returned by [`Scheduler::schedule`], usable for cancellation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventHandle {
    fire_at: SimTime,
    seq: u64,
}

/// Pending-event queue ordered by `(fire_at, seq)`.
///
/// `seq` is a monotonically increasing insertion counter, so two events
/// scheduled for the same instant fire in the order they were scheduled.
#[derive(Debug, Default)]
pub struct Scheduler {
    now: SimTime,
    next_seq: u64,
    pending: BTreeMap<(SimTime, u64), EventPayload>,
}

impl Scheduler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending_count(&self) -> usize {
        self.pending.len()
    }

    /// Schedules `payload` to fire at `fire_at`.
    ///
    /// Panics if `fire_at` is before the current time: an event in the
    /// past is a simulation bug, not a recoverable condition.
    pub fn schedule(&mut self, fire_at: SimTime, payload: EventPayload) -> EventHandle {
        assert!(
            fire_at >= self.now,
            "event scheduled in the past: fire_at={fire_at} now={}",
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.pending.insert((fire_at, seq), payload);
        EventHandle { fire_at, seq }
    }

    /// Removes a pending event. Returns false if it already fired or was
    /// already cancelled; cancellation is idempotent.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        self.pending.remove(&(handle.fire_at, handle.seq)).is_some()
    }

    /// Pops the next event if it fires at or before `t_end`, advancing
    /// the clock to its fire time.
    pub fn pop_due(&mut self, t_end: SimTime) -> Option<Event> {
        let (&(fire_at, seq), _) = self.pending.iter().next()?;
        if fire_at > t_end {
            return None;
        }
        let payload = self.pending.remove(&(fire_at, seq)).unwrap();
        debug_assert!(fire_at >= self.now);
        self.now = fire_at;
        Some(Event {
            fire_at,
            seq,
            payload,
        })
    }

    /// Dispatches events in `(fire_at, seq)` order through `handler`
    /// until the queue is drained past `t_end`. Returns the number of
    /// events processed; the clock ends at `t_end`.
    pub fn run_until(
        &mut self,
        t_end: SimTime,
        mut handler: impl FnMut(&mut Scheduler, Event),
    ) -> usize {
        assert!(t_end >= self.now, "run_until target {t_end} is in the past");
        let mut processed = 0;
        while let Some(event) = self.pop_due(t_end) {
            handler(self, event);
            processed += 1;
        }
        self.now = t_end;
        processed
    }
}

/// Seeded deterministic generator: SplitMix64 for the raw 64-bit stream,
/// Lemire's multiply-shift with rejection for bounded indices (no modulo
/// bias). Identical seed gives an identical draw sequence on every
/// platform.
#[derive(Clone, Debug)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform index in `[0, n)`. Panics if `n == 0`.
    pub fn uniform_index(&mut self, n: usize) -> usize {
        assert!(n >= 1, "uniform_index requires n >= 1");
        let n = n as u64;
        // Lemire 2019: widening multiply, reject the biased low band.
        let mut x = self.next_u64();
        let mut m = (x as u128) * (n as u128);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                x = self.next_u64();
                m = (x as u128) * (n as u128);
                low = m as u64;
            }
        }
        (m >> 64) as usize
    }

    /// Uniform float in `[0, 1)` built from the top 53 bits.
    pub fn uniform_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
