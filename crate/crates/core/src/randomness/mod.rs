//! Seeded randomness and the probability side of the protocol.
//!
//! Draw streams are built on ChaCha8, whose output for a given seed is stable
//! across platforms and releases. Everything downstream (sub-seed derivation,
//! rejection sampling, wheel landing arithmetic) is implemented here in plain
//! integer code, so a `(seed, lane)` pair pins an entire run.

mod analysis;
mod source;
mod wheel;

pub use analysis::{expected_draws_to_streak, prob_streak_within, streak_probability};
pub use source::{derive_seed, DrawSource, ScriptedDraws, SeededRng};
pub use wheel::{Wheel, WheelError};
