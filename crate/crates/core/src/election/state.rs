use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::randomness::{DrawSource, Wheel};

use super::config::{ConfigError, ElectionConfig};
use super::message::{Message, MessageKind};
use super::types::{DrawValue, NodeId, NodeMode, RoundNumber};

/// Why an incoming message was ignored. Dropped messages still surface in the
/// trace so every delivery is accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// The message's round is behind this node's round.
    StaleRound,
    /// An announcement naming some other node as leader.
    WrongLeader,
    /// Payload kind does not match the handler it was routed to.
    WrongKind,
}

/// Deadline that actually fired inside `on_timeout`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeoutKind {
    /// A candidate's vote collection window elapsed.
    Vote,
    /// The announced leader never started heartbeating.
    LeaderAck,
    /// Too many heartbeats missed; the leader is presumed dead.
    LeaderLoss,
}

/// Output of one state machine operation: messages to send plus bookkeeping
/// the harness records. State changes are visible by comparing the node state
/// before and after.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Step {
    pub messages: Vec<Message>,
    pub dropped: Option<DropReason>,
    pub timeouts: Vec<TimeoutKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("draw offered to node {id} in mode {mode} with drawing_enabled={drawing_enabled}")]
    NotDrawing {
        id: NodeId,
        mode: NodeMode,
        drawing_enabled: bool,
    },
}

/// One protocol input; `apply` routes it to the matching handler. Having a
/// single input type keeps determinism tests uniform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    /// The node's periodic random draw, produced by its own stream.
    Draw(DrawValue),
    /// A delivered message.
    Deliver(Message),
    /// A timer check; the node fires whichever of its deadlines have passed.
    TimerCheck,
}

/// Full per-node protocol state. Pure data: handlers mutate it and return a
/// [`Step`], taking the current time and a draw source as parameters, so the
/// same state, input, time, and stream position always produce the same
/// result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState {
    pub id: NodeId,
    pub mode: NodeMode,
    pub round: RoundNumber,
    /// Consecutive above-threshold draws in the current round.
    pub streak: u32,
    /// Largest draw this node produced in the current round, streak member or
    /// not. This is the value it proposes with and answers votes with.
    pub greatest_value: Option<DrawValue>,
    /// Whom this node voted for in the current round, with the granted value.
    /// Under the unoptimized rules later grants may replace it, but only for
    /// strictly greater values.
    pub voted_for: Option<(NodeId, DrawValue)>,
    pub drawing_enabled: bool,
    /// Response values collected this round, keyed by sender. The node's own
    /// value joins at promotion so the wheel can be built from this map alone.
    pub received_values: BTreeMap<NodeId, DrawValue>,
    /// Peers (plus self) whose vote this candidacy holds.
    pub positive_votes: BTreeSet<NodeId>,
    pub vote_deadline: Option<u64>,
    pub leader_ack_deadline: Option<u64>,
    pub leader_heartbeat_deadline: Option<u64>,
    /// Next heartbeat broadcast, armed only while leader.
    pub next_heartbeat_at: Option<u64>,
    /// Cluster members currently believed up, self included. Maintained by
    /// the harness's failure detector; the protocol only reads it.
    pub known_up: BTreeSet<NodeId>,
    /// Leader this node currently follows, if any.
    pub leader: Option<NodeId>,
    /// Wheel winner this coordinator last announced and is awaiting.
    pub announced: Option<NodeId>,
}

fn due(deadline: Option<u64>, now: u64) -> bool {
    deadline.is_some_and(|t| t <= now)
}

impl NodeState {
    pub fn init_node(id: NodeId, cfg: &ElectionConfig) -> Result<NodeState, ConfigError> {
        cfg.validate()?;
        if !cfg.is_member(id) {
            return Err(ConfigError::NotAMember(id));
        }
        Ok(NodeState {
            id,
            mode: NodeMode::Basic,
            round: RoundNumber(0),
            streak: 0,
            greatest_value: None,
            voted_for: None,
            drawing_enabled: true,
            received_values: BTreeMap::new(),
            positive_votes: BTreeSet::new(),
            vote_deadline: None,
            leader_ack_deadline: None,
            leader_heartbeat_deadline: None,
            next_heartbeat_at: None,
            known_up: cfg.membership().collect(),
            leader: None,
            announced: None,
        })
    }

    /// Route one input to its handler.
    pub fn apply(
        &mut self,
        input: &Input,
        now: u64,
        draws: &mut dyn DrawSource,
        cfg: &ElectionConfig,
    ) -> Result<Step, ProtocolError> {
        match input {
            Input::Draw(v) => self.on_draw(*v, now, cfg),
            Input::Deliver(msg) => Ok(match msg.kind {
                MessageKind::Proposal { .. } => self.handle_proposal(msg, now, draws, cfg),
                MessageKind::PositiveVote { .. } | MessageKind::NegativeVote { .. } => {
                    self.handle_vote_response(msg, now, draws, cfg)
                }
                MessageKind::Announcement { .. } => self.handle_announcement(msg, now, cfg),
                MessageKind::Heartbeat { .. } => self.handle_heartbeat(msg, now, cfg),
            }),
            Input::TimerCheck => Ok(self.on_timeout(now, draws, cfg)),
        }
    }

    /// Record one draw from this node's own stream.
    ///
    /// Only a basic node with drawing enabled may draw; anything else is a
    /// harness bug, reported as an error rather than silently absorbed.
    /// Completing the configured streak launches a candidacy: self-vote,
    /// proposals to every peer, vote deadline armed, drawing stopped.
    pub fn on_draw(
        &mut self,
        draw: DrawValue,
        now: u64,
        cfg: &ElectionConfig,
    ) -> Result<Step, ProtocolError> {
        if self.mode != NodeMode::Basic || !self.drawing_enabled {
            return Err(ProtocolError::NotDrawing {
                id: self.id,
                mode: self.mode,
                drawing_enabled: self.drawing_enabled,
            });
        }
        self.greatest_value = Some(match self.greatest_value {
            Some(g) => g.max(draw),
            None => draw,
        });
        if draw > cfg.threshold {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        let mut step = Step::default();
        if self.streak >= cfg.streak_len {
            if self.quorum_possible(cfg) {
                self.launch_candidacy(now, cfg, &mut step);
            } else {
                // Not enough nodes up for any election to succeed: no
                // progress until someone recovers. Keep drawing.
                self.streak = 0;
            }
        }
        Ok(step)
    }

    /// Answer a candidacy.
    ///
    /// Every response, grant or refusal, carries this node's own greatest
    /// value so the eventual coordinator can weight the whole cluster on its
    /// wheel. A node that has not drawn yet answers with one fresh draw.
    pub fn handle_proposal(
        &mut self,
        msg: &Message,
        now: u64,
        draws: &mut dyn DrawSource,
        cfg: &ElectionConfig,
    ) -> Step {
        let MessageKind::Proposal { value } = msg.kind else {
            return Step {
                dropped: Some(DropReason::WrongKind),
                ..Step::default()
            };
        };
        let mut step = Step::default();
        if self.mode == NodeMode::Down {
            return step;
        }
        if msg.round < self.round {
            // Answer with our current round so the stale candidate catches up.
            let own = self.response_value(draws);
            step.messages.push(self.vote_message(msg.from, false, own));
            return step;
        }
        if msg.round > self.round {
            self.start_round(msg.round);
        }

        if matches!(self.mode, NodeMode::Coordinator | NodeMode::Leader) {
            // The round is already decided from where this node stands.
            let own = self.response_value(draws);
            step.messages.push(self.vote_message(msg.from, false, own));
            return step;
        }

        let grant = if cfg.optimized {
            // One vote per round, first candidacy wins it.
            self.voted_for.is_none()
        } else {
            // Re-grant only strictly greater values. A candidate compares
            // against its own proposal value, which is what it voted for.
            match self.voted_for {
                None => true,
                Some((_, granted)) => value > granted,
            }
        };
        let own = self.response_value(draws);
        if grant {
            let was_candidate = self.mode == NodeMode::Candidate;
            self.voted_for = Some((msg.from, value));
            self.drawing_enabled = false;
            self.streak = 0;
            if was_candidate {
                // Someone holds a bigger number than our proposal: our
                // candidacy is void.
                self.abandon_candidacy();
            }
            // A decided round must follow: if the winner never surfaces this
            // deadline forces a fresh round instead of deadlocking.
            if self.leader_heartbeat_deadline.is_none() {
                self.leader_heartbeat_deadline = Some(now + cfg.leader_silence_ms());
            }
            step.messages.push(self.vote_message(msg.from, true, own));
        } else {
            step.messages.push(self.vote_message(msg.from, false, own));
        }
        step
    }

    /// Process a vote for our candidacy.
    ///
    /// Responses are recorded whatever the mode; only a candidate acts on
    /// them. Promotion happens immediately at majority in optimized mode, and
    /// once every peer answered (majority required) otherwise.
    pub fn handle_vote_response(
        &mut self,
        msg: &Message,
        now: u64,
        draws: &mut dyn DrawSource,
        cfg: &ElectionConfig,
    ) -> Step {
        let (value, positive, already_coordinator) = match msg.kind {
            MessageKind::PositiveVote { value } => (value, true, false),
            MessageKind::NegativeVote {
                value,
                already_coordinator,
            } => (value, false, already_coordinator),
            _ => {
                return Step {
                    dropped: Some(DropReason::WrongKind),
                    ..Step::default()
                }
            }
        };
        let mut step = Step::default();
        if self.mode == NodeMode::Down {
            return step;
        }
        if msg.round < self.round {
            step.dropped = Some(DropReason::StaleRound);
            return step;
        }
        if msg.round > self.round {
            // A refusal from a later round: adopt it and start over there.
            self.start_round(msg.round);
        }
        self.received_values.insert(msg.from, value);
        if positive {
            self.positive_votes.insert(msg.from);
        }
        if self.mode != NodeMode::Candidate {
            // Late responses at a settled node: value recorded, nothing more.
            return step;
        }
        if !positive && already_coordinator {
            // The round is decided; stand down and wait for its leader.
            self.abandon_candidacy();
            if self.leader_heartbeat_deadline.is_none() {
                self.leader_heartbeat_deadline = Some(now + cfg.leader_silence_ms());
            }
            return step;
        }
        let own = self
            .greatest_value
            .expect("a candidate has drawn at least a full streak");
        if !positive && value > own {
            // A peer holds a strictly bigger number: this candidacy is void.
            // Resume drawing; the round is still open.
            self.abandon_candidacy();
            self.drawing_enabled = true;
            return step;
        }
        let all_responded = self.received_values.len() >= cfg.nodes as usize - 1;
        let majority = self.positive_votes.len() >= cfg.majority();
        let promote = if cfg.optimized {
            majority
        } else {
            all_responded && majority
        };
        if promote {
            self.promote(now, draws, cfg, &mut step);
        }
        step
    }

    /// The coordinator picked this node as leader.
    pub fn handle_announcement(
        &mut self,
        msg: &Message,
        now: u64,
        cfg: &ElectionConfig,
    ) -> Step {
        let MessageKind::Announcement { leader } = msg.kind else {
            return Step {
                dropped: Some(DropReason::WrongKind),
                ..Step::default()
            };
        };
        let mut step = Step::default();
        if self.mode == NodeMode::Down {
            return step;
        }
        if leader != self.id {
            step.dropped = Some(DropReason::WrongLeader);
            return step;
        }
        if msg.round < self.round {
            step.dropped = Some(DropReason::StaleRound);
            return step;
        }
        if self.mode == NodeMode::Leader && msg.round == self.round {
            // Duplicate announcement (a re-spin raced our first heartbeat).
            return step;
        }
        if msg.round > self.round {
            self.start_round(msg.round);
        }
        self.become_leader(now, cfg, &mut step);
        step
    }

    /// Liveness beacon from a leader.
    pub fn handle_heartbeat(&mut self, msg: &Message, now: u64, cfg: &ElectionConfig) -> Step {
        let MessageKind::Heartbeat { leader } = msg.kind else {
            return Step {
                dropped: Some(DropReason::WrongKind),
                ..Step::default()
            };
        };
        let mut step = Step::default();
        if self.mode == NodeMode::Down {
            return step;
        }
        if msg.round < self.round {
            step.dropped = Some(DropReason::StaleRound);
            return step;
        }
        if msg.round > self.round {
            self.start_round(msg.round);
        }
        self.leader = Some(leader);
        if leader == self.id {
            // Nobody else heartbeats on our behalf; nothing to adopt.
            return step;
        }
        self.leader_heartbeat_deadline = Some(now + cfg.leader_silence_ms());
        // The round is decided: abandon any candidacy or coordination and
        // stop drawing until an election trigger. The vote record stays, so
        // a same-round proposal arriving after this still cannot double-vote.
        self.mode = NodeMode::Basic;
        self.streak = 0;
        self.drawing_enabled = false;
        self.vote_deadline = None;
        self.leader_ack_deadline = None;
        self.next_heartbeat_at = None;
        self.announced = None;
        step
    }

    /// Fire whichever armed deadlines have passed. Called by the harness
    /// whenever virtual time reaches a scheduled check; calling it early or
    /// twice is harmless.
    pub fn on_timeout(
        &mut self,
        now: u64,
        draws: &mut dyn DrawSource,
        cfg: &ElectionConfig,
    ) -> Step {
        let mut step = Step::default();
        if self.mode == NodeMode::Down {
            return step;
        }

        if self.mode == NodeMode::Leader && due(self.next_heartbeat_at, now) {
            self.next_heartbeat_at = Some(now + cfg.heartbeat_interval_ms);
            self.broadcast_heartbeats(cfg, &mut step);
        }

        if self.mode == NodeMode::Candidate && due(self.vote_deadline, now) {
            step.timeouts.push(TimeoutKind::Vote);
            self.vote_deadline = None;
            if self.positive_votes.len() >= cfg.majority() {
                self.promote(now, draws, cfg, &mut step);
            } else if self.quorum_possible(cfg) {
                self.start_round(self.round.next());
            } else {
                // Blocked: not enough nodes up to elect anyone. Hold the
                // candidacy and re-check after another window.
                self.vote_deadline = Some(now + cfg.vote_timeout_ms);
            }
        }

        if self.mode == NodeMode::Coordinator && due(self.leader_ack_deadline, now) {
            step.timeouts.push(TimeoutKind::LeaderAck);
            self.leader_ack_deadline = None;
            if let Some(prev) = self.announced.take() {
                // The silent winner forfeits its slot on the wheel.
                self.received_values.remove(&prev);
            }
            if self.received_values.is_empty() {
                if self.quorum_possible(cfg) {
                    self.start_round(self.round.next());
                } else {
                    self.leader_ack_deadline = Some(now + cfg.leader_ack_timeout_ms);
                }
            } else {
                self.spin_and_announce(now, draws, cfg, &mut step);
            }
        }

        if self.mode != NodeMode::Leader && due(self.leader_heartbeat_deadline, now) {
            step.timeouts.push(TimeoutKind::LeaderLoss);
            if self.quorum_possible(cfg) {
                self.start_round(self.round.next());
            } else {
                self.leader_heartbeat_deadline = Some(now + cfg.leader_silence_ms());
            }
        }

        step
    }

    /// Crash-stop fault injection: the node goes dark. Protocol state other
    /// than timers is kept; what matters is that nothing is sent or received
    /// while down.
    pub fn fault_crash(&mut self) {
        self.mode = NodeMode::Down;
        self.drawing_enabled = false;
        self.vote_deadline = None;
        self.leader_ack_deadline = None;
        self.leader_heartbeat_deadline = None;
        self.next_heartbeat_at = None;
    }

    /// Rejoin after a crash. The round and the round's vote record survive
    /// (a recovered node must not vote twice in a round it already voted in);
    /// any role is lost. The node listens first: it draws again only after
    /// the next election trigger.
    pub fn fault_recover(&mut self, now: u64, cfg: &ElectionConfig) {
        self.mode = NodeMode::Basic;
        self.streak = 0;
        self.drawing_enabled = false;
        self.received_values.clear();
        self.positive_votes.clear();
        self.leader = None;
        self.announced = None;
        self.leader_heartbeat_deadline = Some(now + cfg.leader_silence_ms());
    }

    /// Earliest armed deadline, for harness timer scheduling.
    pub fn next_deadline(&self) -> Option<u64> {
        [
            self.vote_deadline,
            self.leader_ack_deadline,
            self.leader_heartbeat_deadline,
            self.next_heartbeat_at,
        ]
        .into_iter()
        .flatten()
        .min()
    }

    fn quorum_possible(&self, cfg: &ElectionConfig) -> bool {
        self.known_up.len() >= cfg.majority()
    }

    fn peers<'a>(&'a self, cfg: &'a ElectionConfig) -> impl Iterator<Item = NodeId> + 'a {
        cfg.membership().filter(move |&p| p != self.id)
    }

    /// Own greatest value this round, drawing one fresh value if the node has
    /// none yet, so every responder carries weight on the wheel.
    fn response_value(&mut self, draws: &mut dyn DrawSource) -> DrawValue {
        match self.greatest_value {
            Some(v) => v,
            None => {
                let v = draws.next_draw();
                self.greatest_value = Some(v);
                v
            }
        }
    }

    fn vote_message(&self, to: NodeId, positive: bool, value: DrawValue) -> Message {
        let kind = if positive {
            MessageKind::PositiveVote { value }
        } else {
            MessageKind::NegativeVote {
                value,
                already_coordinator: matches!(
                    self.mode,
                    NodeMode::Coordinator | NodeMode::Leader
                ),
            }
        };
        Message {
            from: self.id,
            to,
            round: self.round,
            kind,
        }
    }

    fn launch_candidacy(&mut self, now: u64, cfg: &ElectionConfig, step: &mut Step) {
        let value = self
            .greatest_value
            .expect("a completed streak implies draws");
        self.mode = NodeMode::Candidate;
        self.voted_for = Some((self.id, value));
        self.positive_votes.clear();
        self.positive_votes.insert(self.id);
        self.received_values.clear();
        self.drawing_enabled = false;
        self.vote_deadline = Some(now + cfg.vote_timeout_ms);
        self.leader_heartbeat_deadline = None;
        for peer in self.peers(cfg) {
            step.messages.push(Message {
                from: self.id,
                to: peer,
                round: self.round,
                kind: MessageKind::Proposal { value },
            });
        }
    }

    fn abandon_candidacy(&mut self) {
        self.mode = NodeMode::Basic;
        self.streak = 0;
        self.vote_deadline = None;
    }

    /// Majority reached: run the wheel over every collected value plus our
    /// own and tell the winner it leads.
    fn promote(
        &mut self,
        now: u64,
        draws: &mut dyn DrawSource,
        cfg: &ElectionConfig,
        step: &mut Step,
    ) {
        self.mode = NodeMode::Coordinator;
        self.vote_deadline = None;
        self.leader_heartbeat_deadline = None;
        let own = self
            .greatest_value
            .expect("a candidate has drawn at least a full streak");
        self.received_values.insert(self.id, own);
        self.spin_and_announce(now, draws, cfg, step);
    }

    fn spin_and_announce(
        &mut self,
        now: u64,
        draws: &mut dyn DrawSource,
        cfg: &ElectionConfig,
        step: &mut Step,
    ) {
        // BTreeMap iteration fixes the wheel order: ascending node id.
        let wheel = Wheel::new(self.received_values.iter().map(|(&id, &v)| (id, v)));
        let winner = wheel
            .spin(draws)
            .expect("spin_and_announce requires a non-empty wheel");
        self.announced = Some(winner);
        self.leader_ack_deadline = Some(now + cfg.leader_ack_timeout_ms);
        step.messages.push(Message {
            from: self.id,
            to: winner,
            round: self.round,
            kind: MessageKind::Announcement { leader: winner },
        });
    }

    fn become_leader(&mut self, now: u64, cfg: &ElectionConfig, step: &mut Step) {
        self.mode = NodeMode::Leader;
        self.leader = Some(self.id);
        self.streak = 0;
        self.drawing_enabled = false;
        self.vote_deadline = None;
        self.leader_ack_deadline = None;
        self.leader_heartbeat_deadline = None;
        self.announced = None;
        self.next_heartbeat_at = Some(now + cfg.heartbeat_interval_ms);
        self.broadcast_heartbeats(cfg, step);
    }

    fn broadcast_heartbeats(&mut self, cfg: &ElectionConfig, step: &mut Step) {
        for peer in self.peers(cfg) {
            step.messages.push(Message {
                from: self.id,
                to: peer,
                round: self.round,
                kind: MessageKind::Heartbeat { leader: self.id },
            });
        }
    }

    /// Move to `round` with a clean slate. Round numbers never go backwards.
    fn start_round(&mut self, round: RoundNumber) {
        debug_assert!(round > self.round, "rounds are monotone");
        self.round = round;
        if self.mode != NodeMode::Down {
            self.mode = NodeMode::Basic;
        }
        self.streak = 0;
        self.greatest_value = None;
        self.voted_for = None;
        self.drawing_enabled = true;
        self.received_values.clear();
        self.positive_votes.clear();
        self.vote_deadline = None;
        self.leader_ack_deadline = None;
        self.leader_heartbeat_deadline = None;
        self.next_heartbeat_at = None;
        self.leader = None;
        self.announced = None;
    }
}
