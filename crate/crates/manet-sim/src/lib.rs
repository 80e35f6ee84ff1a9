//! Deterministic discrete-event simulator for mobile ad-hoc network
//! routing: a probe-and-forward random-walk protocol, an AODV-lite
//! baseline, CBR traffic with time-binned delivery/drop metrics, and an
//! exact hitting-time oracle for validating walk statistics.

pub mod analysis;
pub mod aodv;
pub mod engine;
pub mod metrics;
pub mod packet;
pub mod randwalk;
pub mod scenario;
pub mod sim;
pub mod traffic;
pub mod world;

pub use engine::{RngStream, Scheduler, SimTime};
pub use metrics::{DropReason, MetricsLog, Summary};
pub use packet::{NodeId, Packet, PacketKind};
pub use scenario::{parse_scenario, ScenarioConfig, ScenarioError};
pub use sim::{run_scenario, run_to_csv, Protocol, RunResult, Simulation};
pub use world::{Position, World};
