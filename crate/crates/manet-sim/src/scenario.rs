//! Scenario-file parsing and the built-in reproduction scenario.
//!
//! The format is line-based UTF-8: `#` starts a comment, tokens are
//! whitespace-separated, unknown keys are errors rather than silently
//! tolerated typos.

use std::fmt::Write as _;

use thiserror::Error;

use crate::aodv::AodvConfig;
use crate::engine::SimTime;
use crate::packet::NodeId;
use crate::randwalk::RandWalkConfig;
use crate::traffic::CbrStream;
use crate::world::{MotionLeg, MotionPlan, Position, RadioModel, World};

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: unknown node {id}")]
    UnknownNode { line: usize, id: NodeId },
    #[error("line {line}: duplicate node id {id}")]
    DuplicateNode { line: usize, id: NodeId },
    #[error("no nodes defined")]
    NoNodes,
    #[error("node ids must be dense 0..{expected}, missing id {missing}")]
    SparseNodeIds { expected: usize, missing: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub duration: SimTime,
    pub range_m: f64,
    pub hop_delay: SimTime,
    pub nodes: Vec<Position>,
    /// Waypoint legs per node, in file order.
    pub motions: Vec<Vec<MotionLeg>>,
    pub streams: Vec<CbrStream>,
    pub randwalk: RandWalkConfig,
    pub aodv: AodvConfig,
}

impl ScenarioConfig {
    pub fn world(&self) -> World {
        let motions = self
            .nodes
            .iter()
            .zip(&self.motions)
            .map(|(&initial, legs)| MotionPlan {
                initial,
                legs: legs.clone(),
            })
            .collect();
        World::new(motions, RadioModel::new(self.range_m, self.hop_delay))
    }

    /// Canonical reproduction scenario: six nodes, the destination not
    /// in direct range of the source, a multi-hop relay corridor, and
    /// the destination sweeping from (600,200) to (100,200) in one
    /// second while a 50 pkt/s CBR flow runs from node 0 to node 5.
    pub fn paper_6node() -> Self {
        ScenarioConfig {
            duration: SimTime::from_secs_f64(3.0),
            range_m: 250.0,
            hop_delay: SimTime::from_millis(2),
            nodes: vec![
                Position::new(100.0, 200.0),
                Position::new(330.0, 295.0),
                Position::new(560.0, 390.0),
                Position::new(230.0, 80.0),
                Position::new(360.0, 90.0),
                Position::new(600.0, 200.0),
            ],
            motions: vec![
                Vec::new(),
                Vec::new(),
                Vec::new(),
                Vec::new(),
                Vec::new(),
                vec![MotionLeg {
                    start: SimTime::from_secs_f64(1.0),
                    to: Position::new(100.0, 200.0),
                    speed: 500.0,
                }],
            ],
            streams: vec![CbrStream {
                src: 0,
                dst: 5,
                start: SimTime::from_secs_f64(1.0),
                stop: SimTime::from_secs_f64(2.0),
                rate: 50.0,
                payload_size: 512,
            }],
            randwalk: RandWalkConfig::default(),
            aodv: AodvConfig::default(),
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "paper-6node" => Some(Self::paper_6node()),
            _ => None,
        }
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "duration {}", self.duration.as_secs_f64()).unwrap();
        writeln!(out, "range {}", self.range_m).unwrap();
        writeln!(
            out,
            "hop_delay_ms {}",
            self.hop_delay.as_micros() as f64 / 1e3
        )
        .unwrap();
        for (id, p) in self.nodes.iter().enumerate() {
            writeln!(out, "node {id} {} {}", p.x, p.y).unwrap();
        }
        for (id, legs) in self.motions.iter().enumerate() {
            for leg in legs {
                writeln!(
                    out,
                    "move {id} start {} to {} {} speed {}",
                    leg.start.as_secs_f64(),
                    leg.to.x,
                    leg.to.y,
                    leg.speed
                )
                .unwrap();
            }
        }
        for s in &self.streams {
            writeln!(
                out,
                "cbr src {} dst {} start {} stop {} rate {} size {}",
                s.src,
                s.dst,
                s.start.as_secs_f64(),
                s.stop.as_secs_f64(),
                s.rate,
                s.payload_size
            )
            .unwrap();
        }
        writeln!(
            out,
            "randwalk collect_window_ms {} max_ttl {} exclude_prev {}",
            self.randwalk.collect_window.as_micros() as f64 / 1e3,
            self.randwalk.max_ttl,
            self.randwalk.exclude_prev_hop as u8
        )
        .unwrap();
        writeln!(
            out,
            "aodv rreq_ttl {} buffer {}",
            self.aodv.rreq_ttl, self.aodv.buffer_capacity
        )
        .unwrap();
        out
    }
}

struct Parser<'a> {
    line: usize,
    tokens: std::str::SplitWhitespace<'a>,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> ScenarioError {
        ScenarioError::Syntax {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str, ScenarioError> {
        self.tokens
            .next()
            .ok_or_else(|| self.err(format!("missing {what}")))
    }

    fn literal(&mut self, word: &str) -> Result<(), ScenarioError> {
        let tok = self.next(&format!("'{word}'"))?;
        if tok != word {
            return Err(self.err(format!("expected '{word}', found '{tok}'")));
        }
        Ok(())
    }

    fn f64(&mut self, what: &str) -> Result<f64, ScenarioError> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| self.err(format!("invalid {what} '{tok}'")))
    }

    fn usize(&mut self, what: &str) -> Result<usize, ScenarioError> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| self.err(format!("invalid {what} '{tok}'")))
    }

    fn u32(&mut self, what: &str) -> Result<u32, ScenarioError> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| self.err(format!("invalid {what} '{tok}'")))
    }

    fn secs(&mut self, what: &str) -> Result<SimTime, ScenarioError> {
        let v = self.f64(what)?;
        if !v.is_finite() || v < 0.0 {
            return Err(self.err(format!("{what} must be non-negative")));
        }
        Ok(SimTime::from_secs_f64(v))
    }

    fn millis(&mut self, what: &str) -> Result<SimTime, ScenarioError> {
        let v = self.f64(what)?;
        if !v.is_finite() || v <= 0.0 {
            return Err(self.err(format!("{what} must be positive")));
        }
        Ok(SimTime::from_micros((v * 1e3).round() as u64))
    }

    fn finish(&mut self) -> Result<(), ScenarioError> {
        match self.tokens.next() {
            Some(extra) => Err(self.err(format!("unexpected trailing token '{extra}'"))),
            None => Ok(()),
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let mut duration: Option<SimTime> = None;
    let mut range_m = 250.0;
    let mut hop_delay = SimTime::from_millis(2);
    let mut nodes: Vec<(usize, Position, usize)> = Vec::new(); // (id, pos, line)
    let mut moves: Vec<(usize, MotionLeg, usize)> = Vec::new();
    let mut cbrs: Vec<(CbrStream, usize)> = Vec::new();
    let mut randwalk = RandWalkConfig::default();
    let mut aodv = AodvConfig::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut p = Parser {
            line,
            tokens: content.split_whitespace(),
        };
        let Some(key) = p.tokens.next() else { continue };
        match key {
            "duration" => {
                duration = Some(p.secs("duration")?);
                p.finish()?;
            }
            "range" => {
                range_m = p.f64("range")?;
                if range_m.is_nan() || range_m <= 0.0 {
                    return Err(p.err("range must be positive"));
                }
                p.finish()?;
            }
            "hop_delay_ms" => {
                hop_delay = p.millis("hop delay")?;
                p.finish()?;
            }
            "node" => {
                let id = p.usize("node id")?;
                let x = p.f64("x coordinate")?;
                let y = p.f64("y coordinate")?;
                p.finish()?;
                if nodes.iter().any(|&(n, _, _)| n == id) {
                    return Err(ScenarioError::DuplicateNode { line, id });
                }
                nodes.push((id, Position::new(x, y), line));
            }
            "move" => {
                let id = p.usize("node id")?;
                p.literal("start")?;
                let start = p.secs("start time")?;
                p.literal("to")?;
                let x = p.f64("x coordinate")?;
                let y = p.f64("y coordinate")?;
                p.literal("speed")?;
                let speed = p.f64("speed")?;
                if speed.is_nan() || speed <= 0.0 {
                    return Err(p.err("speed must be positive"));
                }
                p.finish()?;
                moves.push((
                    id,
                    MotionLeg {
                        start,
                        to: Position::new(x, y),
                        speed,
                    },
                    line,
                ));
            }
            "cbr" => {
                p.literal("src")?;
                let src = p.usize("source id")?;
                p.literal("dst")?;
                let dst = p.usize("destination id")?;
                p.literal("start")?;
                let start = p.secs("start time")?;
                p.literal("stop")?;
                let stop = p.secs("stop time")?;
                p.literal("rate")?;
                let rate = p.f64("rate")?;
                p.literal("size")?;
                let size = p.u32("payload size")?;
                if rate.is_nan() || rate <= 0.0 {
                    return Err(p.err("rate must be positive"));
                }
                if start >= stop {
                    return Err(p.err("cbr start must precede stop"));
                }
                p.finish()?;
                cbrs.push((
                    CbrStream {
                        src,
                        dst,
                        start,
                        stop,
                        rate,
                        payload_size: size,
                    },
                    line,
                ));
            }
            "randwalk" => {
                p.literal("collect_window_ms")?;
                randwalk.collect_window = p.millis("collect window")?;
                p.literal("max_ttl")?;
                randwalk.max_ttl = p.u32("max ttl")?;
                if randwalk.max_ttl < 1 {
                    return Err(p.err("max_ttl must be at least 1"));
                }
                p.literal("exclude_prev")?;
                randwalk.exclude_prev_hop = match p.next("exclude_prev flag")? {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(p.err(format!("exclude_prev must be 0 or 1, got '{other}'")))
                    }
                };
                p.finish()?;
            }
            "aodv" => {
                p.literal("rreq_ttl")?;
                aodv.rreq_ttl = p.u32("rreq ttl")?;
                p.literal("buffer")?;
                aodv.buffer_capacity = p.usize("buffer capacity")?;
                p.finish()?;
            }
            other => {
                return Err(ScenarioError::UnknownKey {
                    line,
                    key: other.to_string(),
                })
            }
        }
    }

    if nodes.is_empty() {
        return Err(ScenarioError::NoNodes);
    }
    let n = nodes.len();
    nodes.sort_by_key(|&(id, _, _)| id);
    for (expect, &(id, _, line)) in nodes.iter().enumerate() {
        if id != expect {
            if id >= n {
                return Err(ScenarioError::UnknownNode { line, id });
            }
            return Err(ScenarioError::SparseNodeIds {
                expected: n,
                missing: expect,
            });
        }
    }

    let mut motions: Vec<Vec<MotionLeg>> = vec![Vec::new(); n];
    for (id, leg, line) in moves {
        if id >= n {
            return Err(ScenarioError::UnknownNode { line, id });
        }
        motions[id].push(leg);
    }
    for legs in &mut motions {
        legs.sort_by_key(|leg| leg.start);
    }
    let mut streams = Vec::new();
    for (s, line) in cbrs {
        if s.src >= n {
            return Err(ScenarioError::UnknownNode { line, id: s.src });
        }
        if s.dst >= n {
            return Err(ScenarioError::UnknownNode { line, id: s.dst });
        }
        streams.push(s);
    }

    let max_stop = streams.iter().map(|s| s.stop).max();
    // Default duration leaves one second of drain past the last stream.
    let duration = duration.unwrap_or_else(|| match max_stop {
        Some(stop) => stop + SimTime::from_secs_f64(1.0),
        None => SimTime::from_secs_f64(10.0),
    });
    if let Some(stop) = max_stop {
        if duration <= stop {
            return Err(ScenarioError::Invalid(format!(
                "duration {} must exceed the last stream stop {}",
                duration, stop
            )));
        }
    }

    Ok(ScenarioConfig {
        duration,
        range_m,
        hop_delay,
        nodes: nodes.into_iter().map(|(_, p, _)| p).collect(),
        motions,
        streams,
        randwalk,
        aodv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenario_parses_back() {
        let cfg = ScenarioConfig::paper_6node();
        let parsed = parse_scenario(&cfg.serialize()).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn builtin_has_expected_shape() {
        let cfg = ScenarioConfig::paper_6node();
        assert_eq!(cfg.nodes.len(), 6);
        assert_eq!(cfg.motions.iter().flatten().count(), 1);
        assert_eq!(cfg.streams.len(), 1);
        assert_eq!((cfg.streams[0].src, cfg.streams[0].dst), (0, 5));
    }

    #[test]
    fn source_and_destination_start_out_of_range() {
        let cfg = ScenarioConfig::paper_6node();
        let d = cfg.nodes[0].distance(cfg.nodes[5]);
        assert!((d - 500.0).abs() < 1e-9);
        assert!(d > cfg.range_m);
    }

    #[test]
    fn move_of_unknown_node_is_an_error() {
        let text = "node 0 0 0\nnode 1 10 0\nmove 9 start 1.0 to 5 5 speed 10\n";
        assert_eq!(
            parse_scenario(text).unwrap_err(),
            ScenarioError::UnknownNode { line: 3, id: 9 }
        );
    }

    #[test]
    fn empty_file_is_an_error() {
        assert_eq!(parse_scenario("").unwrap_err(), ScenarioError::NoNodes);
        assert_eq!(
            parse_scenario("# only a comment\n").unwrap_err(),
            ScenarioError::NoNodes
        );
    }

    #[test]
    fn duplicate_node_id_is_an_error() {
        let err = parse_scenario("node 0 0 0\nnode 0 5 5\n").unwrap_err();
        assert_eq!(err, ScenarioError::DuplicateNode { line: 2, id: 0 });
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = parse_scenario("node 0 0 0\nspeed_of_light 3e8\n").unwrap_err();
        assert!(matches!(err, ScenarioError::UnknownKey { line: 2, .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# header\n\nnode 0 0 0  # trailing comment\nnode 1 10 0\n";
        let cfg = parse_scenario(text).unwrap();
        assert_eq!(cfg.nodes.len(), 2);
    }

    #[test]
    fn duration_must_exceed_stream_stop() {
        let text = "duration 1.5\nnode 0 0 0\nnode 1 10 0\n\
                    cbr src 0 dst 1 start 1.0 stop 2.0 rate 10 size 64\n";
        assert!(matches!(
            parse_scenario(text).unwrap_err(),
            ScenarioError::Invalid(_)
        ));
    }

    #[test]
    fn unknown_builtin_is_none() {
        assert!(ScenarioConfig::builtin("nope").is_none());
        assert!(ScenarioConfig::builtin("paper-6node").is_some());
    }
}
