//! Append-only per-packet accounting, reduced to time-binned CSV rows.
//!
//! The log enforces its own invariants hard: exactly one INJECTED per
//! uid and at most one terminal record. A violation is a protocol
//! accounting bug and aborts the run.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::engine::SimTime;
use crate::packet::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DropReason {
    TtlExhausted,
    NoNeighbor,
    LinkBreak,
    NoRoute,
    BufferOverflow,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RecordKind {
    Injected { dst: NodeId },
    Delivered { hops: u32 },
    Dropped { reason: DropReason },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub time: SimTime,
    pub uid: u64,
    /// Node at which the event occurred (source, delivering node, or
    /// dropping node).
    pub node: NodeId,
    pub kind: RecordKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum UidState {
    Injected,
    Terminal,
}

#[derive(Clone, Debug, Default)]
pub struct MetricsLog {
    records: Vec<Record>,
    state: HashMap<u64, UidState>,
}

/// Conservation totals for one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub injected: u64,
    pub delivered: u64,
    pub dropped_ttl: u64,
    pub dropped_no_neighbor: u64,
    pub dropped_link_break: u64,
    pub dropped_no_route: u64,
    pub dropped_buffer: u64,
    pub in_flight: u64,
}

impl Summary {
    pub fn dropped_total(&self) -> u64 {
        self.dropped_ttl
            + self.dropped_no_neighbor
            + self.dropped_link_break
            + self.dropped_no_route
            + self.dropped_buffer
    }
}

/// One half-open time bin `[bin_start, bin_start + width)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BinRow {
    pub bin_start: SimTime,
    pub injected: u64,
    pub delivered: u64,
    pub dropped_ttl: u64,
    pub dropped_no_neighbor: u64,
    pub dropped_link_break: u64,
    pub dropped_no_route: u64,
    pub dropped_buffer: u64,
}

impl MetricsLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    fn push(&mut self, record: Record) {
        if let Some(last) = self.records.last() {
            assert!(
                record.time >= last.time,
                "metrics record times must be nondecreasing"
            );
        }
        self.records.push(record);
    }

    pub fn injected(&mut self, time: SimTime, uid: u64, src: NodeId, dst: NodeId) {
        let prev = self.state.insert(uid, UidState::Injected);
        assert!(prev.is_none(), "duplicate INJECTED record for uid {uid}");
        self.push(Record {
            time,
            uid,
            node: src,
            kind: RecordKind::Injected { dst },
        });
    }

    pub fn delivered(&mut self, time: SimTime, uid: u64, node: NodeId, hops: u32) {
        self.terminal(uid);
        self.push(Record {
            time,
            uid,
            node,
            kind: RecordKind::Delivered { hops },
        });
    }

    pub fn dropped(&mut self, time: SimTime, uid: u64, node: NodeId, reason: DropReason) {
        self.terminal(uid);
        self.push(Record {
            time,
            uid,
            node,
            kind: RecordKind::Dropped { reason },
        });
    }

    fn terminal(&mut self, uid: u64) {
        match self.state.get(&uid) {
            Some(UidState::Injected) => {
                self.state.insert(uid, UidState::Terminal);
            }
            Some(UidState::Terminal) => {
                panic!("second terminal record for uid {uid} (accounting bug)")
            }
            None => panic!("terminal record for uid {uid} with no INJECTED"),
        }
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for r in &self.records {
            match r.kind {
                RecordKind::Injected { .. } => s.injected += 1,
                RecordKind::Delivered { .. } => s.delivered += 1,
                RecordKind::Dropped { reason } => match reason {
                    DropReason::TtlExhausted => s.dropped_ttl += 1,
                    DropReason::NoNeighbor => s.dropped_no_neighbor += 1,
                    DropReason::LinkBreak => s.dropped_link_break += 1,
                    DropReason::NoRoute => s.dropped_no_route += 1,
                    DropReason::BufferOverflow => s.dropped_buffer += 1,
                },
            }
        }
        s.in_flight = s.injected - s.delivered - s.dropped_total();
        s
    }

    /// Partitions every record into half-open bins `[k*w, (k+1)*w)`
    /// covering `[0, duration]`.
    pub fn bin_counts(&self, bin_width: SimTime, duration: SimTime) -> Vec<BinRow> {
        assert!(bin_width > SimTime::ZERO, "bin width must be positive");
        let w = bin_width.as_micros();
        let n_bins = (duration.as_micros() / w + 1) as usize;
        let mut rows: Vec<BinRow> = (0..n_bins)
            .map(|k| BinRow {
                bin_start: SimTime::from_micros(k as u64 * w),
                ..BinRow::default()
            })
            .collect();
        for r in &self.records {
            let k = (r.time.as_micros() / w) as usize;
            assert!(k < rows.len(), "record at {} past run duration", r.time);
            let row = &mut rows[k];
            match r.kind {
                RecordKind::Injected { .. } => row.injected += 1,
                RecordKind::Delivered { .. } => row.delivered += 1,
                RecordKind::Dropped { reason } => match reason {
                    DropReason::TtlExhausted => row.dropped_ttl += 1,
                    DropReason::NoNeighbor => row.dropped_no_neighbor += 1,
                    DropReason::LinkBreak => row.dropped_link_break += 1,
                    DropReason::NoRoute => row.dropped_no_route += 1,
                    DropReason::BufferOverflow => row.dropped_buffer += 1,
                },
            }
        }
        rows
    }
}

pub const CSV_HEADER: &str = "bin_start,protocol,seed,injected,delivered,dropped_ttl,\
dropped_no_neighbor,dropped_link_break,dropped_no_route,dropped_buffer";

/// Appends one CSV line per bin, `\n`-terminated, locale-independent.
pub fn write_csv_rows(out: &mut String, protocol: &str, seed: u64, rows: &[BinRow]) {
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.bin_start,
            protocol,
            seed,
            r.injected,
            r.delivered,
            r.dropped_ttl,
            r.dropped_no_neighbor,
            r.dropped_link_break,
            r.dropped_no_route,
            r.dropped_buffer
        )
        .unwrap();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(secs: f64) -> SimTime {
        SimTime::from_secs_f64(secs)
    }

    #[test]
    fn inject_then_deliver_is_accepted() {
        let mut log = MetricsLog::new();
        log.injected(t(1.0), 7, 0, 5);
        log.delivered(t(1.2), 7, 5, 3);
        let s = log.summary();
        assert_eq!((s.injected, s.delivered, s.in_flight), (1, 1, 0));
    }

    #[test]
    #[should_panic(expected = "second terminal record")]
    fn double_terminal_panics() {
        let mut log = MetricsLog::new();
        log.injected(t(1.0), 7, 0, 5);
        log.delivered(t(1.2), 7, 5, 3);
        log.dropped(t(1.3), 7, 2, DropReason::LinkBreak);
    }

    #[test]
    fn delivered_stores_hop_count() {
        let mut log = MetricsLog::new();
        log.injected(t(1.0), 1, 0, 5);
        log.delivered(t(1.1), 1, 5, 3);
        match log.records()[1].kind {
            RecordKind::Delivered { hops } => assert_eq!(hops, 3),
            _ => panic!("expected delivery record"),
        }
    }

    #[test]
    fn empty_log_bins_are_all_zero() {
        let rows = MetricsLog::new().bin_counts(t(0.25), t(1.0));
        assert_eq!(rows.len(), 5);
        assert!(rows
            .iter()
            .all(|r| r.injected == 0 && r.delivered == 0 && r.dropped_ttl == 0));
    }

    #[test]
    fn delivery_lands_in_owning_bin() {
        let mut log = MetricsLog::new();
        log.injected(t(1.0), 1, 0, 5);
        log.delivered(t(1.30), 1, 5, 2);
        let rows = log.bin_counts(t(0.25), t(2.0));
        let row = rows.iter().find(|r| r.bin_start == t(1.25)).unwrap();
        assert_eq!(row.delivered, 1);
    }

    proptest! {
        /// Binning is a partition: column sums equal total record counts
        /// for any bin width.
        #[test]
        fn bin_counts_partition(
            times in proptest::collection::vec(0u64..3_000_000, 1..60),
            width_us in 1_000u64..700_000,
        ) {
            let mut sorted = times.clone();
            sorted.sort();
            let mut log = MetricsLog::new();
            for (i, &us) in sorted.iter().enumerate() {
                log.injected(SimTime::from_micros(us), i as u64, 0, 1);
            }
            let rows = log.bin_counts(SimTime::from_micros(width_us), SimTime::from_secs_f64(3.0));
            let total: u64 = rows.iter().map(|r| r.injected).sum();
            prop_assert_eq!(total, sorted.len() as u64);
        }
    }
}
