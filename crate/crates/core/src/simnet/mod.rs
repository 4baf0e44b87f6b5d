//! Deterministic cluster simulation.
//!
//! A [`SimSpec`] fully determines a run: protocol config, seed, latency
//! model, draw plan, fault schedule, and stop rule. Runs produce JSON-lines
//! traces whose header is the spec itself, so any trace can be replayed and
//! compared byte for byte. [`check_trace`] audits recorded traces against
//! the protocol's global invariants, and [`Scenario`] packages scripted runs
//! with verified postconditions.

mod check;
mod fault;
mod latency;
mod runner;
mod scenario;
mod trace;

pub use check::{check_trace, CheckViolation, TraceSummary};
pub use fault::{FaultEvent, FaultKind};
pub use latency::{ChannelDelays, LatencyError, LatencyModel};
pub use runner::{
    replay, run, DrawPlan, NodeDraws, NodeSummary, ReplayReport, RunStats, SimError, SimOutcome,
    SimSpec, StopRule,
};
pub use scenario::{
    find, registry, run_scenario, DuelingCandidates, Scenario, ScenarioError, SingleCandidate,
};
pub use trace::{read_trace, write_trace, TraceEvent, TraceHeader, TraceRecord, FORMAT_VERSION};
