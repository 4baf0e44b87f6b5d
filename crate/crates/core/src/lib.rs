//! Randomized leader election over roulette-wheel selection, plus the
//! deterministic machinery needed to study it: a pure protocol state machine,
//! a seeded discrete-event network simulator, and measurement campaigns.
//!
//! Layout:
//!
//! * [`election`] - protocol types and the per-node state machine. Pure code:
//!   time and randomness enter as parameters.
//! * [`randomness`] - seeded draw streams, the roulette wheel, and closed-form
//!   streak probability analysis.
//! * [`simnet`] - single-threaded discrete-event simulator with latency
//!   models, crash/recover fault injection, JSON-lines traces, and replay.
//! * [`experiments`] - launch-time and election-latency campaigns with CSV,
//!   JSON, and text histogram output.

pub mod election;
pub mod experiments;
pub mod randomness;
pub mod simnet;
