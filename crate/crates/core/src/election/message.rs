use serde::{Deserialize, Serialize};

use super::types::{DrawValue, NodeId, RoundNumber};

/// Wire payloads. Which fields exist per kind is fixed by the variant, so a
/// structurally malformed message is unrepresentable once parsed; parse errors
/// surface at the serde boundary instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MessageKind {
    /// Candidacy announcement carrying the sender's greatest draw this round.
    Proposal { value: DrawValue },
    /// Vote grant. `value` is the responder's own greatest draw, which feeds
    /// the coordinator's wheel.
    PositiveVote { value: DrawValue },
    /// Vote refusal, still carrying the responder's own greatest draw.
    /// `already_coordinator` tells the proposer the round is decided and it
    /// must stand down.
    NegativeVote {
        value: DrawValue,
        already_coordinator: bool,
    },
    /// Coordinator notifying the wheel winner that it is now leader.
    Announcement { leader: NodeId },
    /// Periodic liveness beacon from the leader.
    Heartbeat { leader: NodeId },
}

impl MessageKind {
    /// Stable lowercase tag, matching the serialized `kind` field.
    pub fn tag(&self) -> &'static str {
        match self {
            MessageKind::Proposal { .. } => "proposal",
            MessageKind::PositiveVote { .. } => "positive_vote",
            MessageKind::NegativeVote { .. } => "negative_vote",
            MessageKind::Announcement { .. } => "announcement",
            MessageKind::Heartbeat { .. } => "heartbeat",
        }
    }

    pub fn is_heartbeat(&self) -> bool {
        matches!(self, MessageKind::Heartbeat { .. })
    }

    pub fn is_vote_response(&self) -> bool {
        matches!(
            self,
            MessageKind::PositiveVote { .. } | MessageKind::NegativeVote { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub from: NodeId,
    pub to: NodeId,
    pub round: RoundNumber,
    #[serde(flatten)]
    pub kind: MessageKind,
}
