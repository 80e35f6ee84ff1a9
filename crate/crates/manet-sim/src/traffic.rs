//! Constant-bit-rate traffic streams.

use crate::engine::SimTime;
use crate::packet::NodeId;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CbrStream {
    pub src: NodeId,
    pub dst: NodeId,
    pub start: SimTime,
    pub stop: SimTime,
    /// Packets per second.
    pub rate: f64,
    pub payload_size: u32,
}

impl CbrStream {
    /// Inter-packet period, rounded to the nearest microsecond.
    pub fn period(&self) -> SimTime {
        assert!(self.rate > 0.0, "CBR rate must be positive");
        SimTime::from_micros((1e6 / self.rate).round() as u64)
    }

    /// Injection instants `start, start + 1/rate, ...` strictly below
    /// `stop`.
    pub fn injections(&self) -> Vec<SimTime> {
        assert!(self.start < self.stop, "CBR start must precede stop");
        let period = self.period();
        let mut times = Vec::new();
        let mut t = self.start;
        while t < self.stop {
            times.push(t);
            t += period;
        }
        times
    }
}
