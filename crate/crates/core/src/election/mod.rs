//! Protocol types and the per-node election state machine.
//!
//! Nodes repeatedly draw random values in (0, 1). A node that draws a
//! configured number of consecutive values above a threshold proposes itself,
//! collects votes, and on a majority becomes coordinator; the coordinator then
//! picks the leader by spinning a roulette wheel over everyone's best draw, so
//! each participant keeps a weight-proportional chance.
//!
//! Everything here is deterministic: handlers take the current virtual time
//! and a caller-owned draw source, and return the messages to send. No clocks,
//! sockets, or hidden RNG state.

mod config;
mod message;
mod state;
mod types;

pub use config::{ConfigError, ElectionConfig};
pub use message::{Message, MessageKind};
pub use state::{DropReason, Input, NodeState, ProtocolError, Step, TimeoutKind};
pub use types::{DrawValue, NodeId, NodeMode, RoundNumber, ValueError};
