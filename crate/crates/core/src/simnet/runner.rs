//! Deterministic discrete-event execution of a cluster.
//!
//! Virtual time is integer milliseconds. Every queued event carries an
//! `(at, seq)` key, `seq` being an insertion counter, so ties break by
//! scheduling order and a run is a pure function of its [`SimSpec`].
//! Faults scheduled for an instant are injected before deliveries of the
//! same instant.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::election::{
    ConfigError, ElectionConfig, Input, Message, NodeId, NodeMode, NodeState, ProtocolError,
    RoundNumber,
};
use crate::randomness::{derive_seed, DrawSource, ScriptedDraws, SeededRng};

use super::fault::{FaultEvent, FaultKind};
use super::latency::{LatencyError, LatencyModel, LatencyState};
use super::trace::{TraceEvent, TraceHeader, TraceRecord, FORMAT_VERSION};
use crate::election::DrawValue;

/// Stream lane for message latencies, distinct from every node's draw lane
/// (nodes use their index).
const LATENCY_LANE: u64 = u64::MAX - 1;

/// Complete description of one run. Serialized as the trace header; feeding
/// it back through [`run`] reproduces the trace exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub config: ElectionConfig,
    pub seed: u64,
    pub latency: LatencyModel,
    #[serde(default)]
    pub draw_plan: DrawPlan,
    #[serde(default)]
    pub faults: Vec<FaultEvent>,
    #[serde(default)]
    pub stop: StopRule,
}

/// Where the nodes' periodic draws come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "plan", rename_all = "snake_case", deny_unknown_fields)]
pub enum DrawPlan {
    /// Each node draws from its own stream, derived from the run seed and
    /// the node's index.
    #[default]
    Seeded,
    /// Exact values per node, in draw order; after its list runs out a node
    /// keeps drawing the final value. Every member must be listed.
    Scripted { nodes: Vec<NodeDraws> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDraws {
    pub node: NodeId,
    pub draws: Vec<DrawValue>,
}

/// When the run halts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StopRule {
    /// Halt once a leader has been acknowledged by a majority and has then
    /// held power for `extra_intervals` heartbeat intervals with no election
    /// activity in a later round. `max_time_ms` is the backstop.
    StableLeader { extra_intervals: u64, max_time_ms: u64 },
    /// Run the clock out unconditionally.
    MaxTime { max_time_ms: u64 },
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::StableLeader {
            extra_intervals: 2,
            max_time_ms: 60_000,
        }
    }
}

impl StopRule {
    fn max_time_ms(&self) -> u64 {
        match *self {
            StopRule::StableLeader { max_time_ms, .. } | StopRule::MaxTime { max_time_ms } => {
                max_time_ms
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("latency model: {0}")]
    Latency(#[from] LatencyError),
    #[error("draw plan: {0}")]
    DrawPlan(String),
    #[error("fault at t={at} on node {node}: {reason}")]
    BadFault {
        at: u64,
        node: NodeId,
        reason: &'static str,
    },
    #[error("protocol violation at t={at}: {source}")]
    Protocol { at: u64, source: ProtocolError },
    #[error("trace format version {found} is not {FORMAT_VERSION}")]
    BadFormatVersion { found: u32 },
}

/// Aggregate outcome of one run. `election_ms` times the first election;
/// `leader` / `round` describe the latest one, i.e. the leadership in force
/// when the run stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub elected: bool,
    pub leader: Option<NodeId>,
    pub round: Option<RoundNumber>,
    /// Virtual time at which a majority first acknowledged a leader.
    pub election_ms: Option<u64>,
    /// Candidacy launches over the whole run; 1 means an uncontested election.
    pub candidacies: usize,
    /// Distinct nodes that entered Candidate in the round that elected the
    /// current leader; 0 when nothing was elected. 2+ marks a split vote.
    pub candidates_seen: usize,
    /// Rounds the run touched: highest round recorded, plus one.
    pub rounds_used: u64,
    pub messages_total: usize,
    pub messages_by_kind: BTreeMap<String, usize>,
    pub non_heartbeat_messages: usize,
    /// True when the run ended unelected with fewer live nodes than a
    /// majority, i.e. no election could ever have succeeded.
    pub blocked: bool,
    pub alive_at_stop: usize,
    pub finished_at: u64,
}

/// A node's externally visible state when the run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub id: NodeId,
    pub mode: NodeMode,
    pub round: RoundNumber,
    pub leader: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub header: TraceHeader,
    pub stats: RunStats,
    pub records: Vec<TraceRecord>,
    pub final_nodes: Vec<NodeSummary>,
}

impl SimOutcome {
    /// The trace as serialized lines: header first, then one per record.
    pub fn trace_lines(&self) -> Vec<String> {
        let mut lines = Vec::with_capacity(self.records.len() + 1);
        lines.push(serde_json::to_string(&self.header).expect("header serializes"));
        for rec in &self.records {
            lines.push(serde_json::to_string(rec).expect("record serializes"));
        }
        lines
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum EventKind {
    Deliver(Message),
    DrawTick(NodeId),
    TimerCheck(NodeId),
    Fault(FaultKind, NodeId),
}

struct Sim {
    cfg: ElectionConfig,
    nodes: BTreeMap<NodeId, NodeState>,
    draws: BTreeMap<NodeId, Box<dyn DrawSource>>,
    latency: LatencyState,
    queue: BTreeMap<(u64, u64), EventKind>,
    next_seq: u64,
    now: u64,
    records: Vec<TraceRecord>,
    tick_pending: BTreeSet<NodeId>,
    alive: BTreeSet<NodeId>,
    // Election bookkeeping.
    candidacies: usize,
    candidate_rounds: BTreeMap<RoundNumber, BTreeSet<NodeId>>,
    max_round: RoundNumber,
    messages_by_kind: BTreeMap<&'static str, usize>,
    acks: BTreeMap<(NodeId, RoundNumber), BTreeSet<NodeId>>,
    quorate: BTreeSet<(NodeId, RoundNumber)>,
    first_election_ms: Option<u64>,
    current: Option<(NodeId, RoundNumber)>,
    settled_since: Option<u64>,
}

/// Execute `spec` to completion.
pub fn run(spec: &SimSpec) -> Result<SimOutcome, SimError> {
    spec.config.validate()?;
    spec.latency.validate()?;
    validate_draw_plan(spec)?;
    for f in &spec.faults {
        if !spec.config.is_member(f.node) {
            return Err(SimError::BadFault {
                at: f.at,
                node: f.node,
                reason: "not a cluster member",
            });
        }
    }

    let mut nodes = BTreeMap::new();
    for id in spec.config.membership() {
        nodes.insert(id, NodeState::init_node(id, &spec.config)?);
    }
    let mut draws: BTreeMap<NodeId, Box<dyn DrawSource>> = BTreeMap::new();
    match &spec.draw_plan {
        DrawPlan::Seeded => {
            for id in spec.config.membership() {
                draws.insert(
                    id,
                    Box::new(SeededRng::new(derive_seed(spec.seed, id.index() as u64))),
                );
            }
        }
        DrawPlan::Scripted { nodes } => {
            for nd in nodes {
                draws.insert(nd.node, Box::new(ScriptedDraws::new(nd.draws.clone())));
            }
        }
    }

    let mut sim = Sim {
        cfg: spec.config.clone(),
        nodes,
        draws,
        latency: spec
            .latency
            .clone()
            .into_state(SeededRng::new(derive_seed(spec.seed, LATENCY_LANE))),
        queue: BTreeMap::new(),
        next_seq: 0,
        now: 0,
        records: Vec::new(),
        tick_pending: BTreeSet::new(),
        alive: spec.config.membership().collect(),
        candidacies: 0,
        candidate_rounds: BTreeMap::new(),
        max_round: RoundNumber(0),
        messages_by_kind: BTreeMap::new(),
        acks: BTreeMap::new(),
        quorate: BTreeSet::new(),
        first_election_ms: None,
        current: None,
        settled_since: None,
    };

    for f in &spec.faults {
        sim.push(f.at, EventKind::Fault(f.kind, f.node));
    }
    for id in spec.config.membership() {
        sim.push(spec.config.draw_period_ms, EventKind::DrawTick(id));
        sim.tick_pending.insert(id);
    }

    let max_time = spec.stop.max_time_ms();
    loop {
        let Some((&(at, _), _)) = sim.queue.first_key_value() else {
            break;
        };
        if at > max_time {
            break;
        }
        if let StopRule::StableLeader {
            extra_intervals, ..
        } = spec.stop
        {
            if let Some(q) = sim.settled_since {
                if at >= q + extra_intervals * spec.config.heartbeat_interval_ms {
                    break;
                }
            }
        }
        let ((at, _), kind) = sim.queue.pop_first().expect("peeked above");
        sim.now = at;
        sim.dispatch(kind)?;
    }

    let stats = sim.build_stats();
    let final_nodes = sim
        .nodes
        .values()
        .map(|n| NodeSummary {
            id: n.id,
            mode: n.mode,
            round: n.round,
            leader: n.leader,
        })
        .collect();
    Ok(SimOutcome {
        header: TraceHeader {
            format_version: FORMAT_VERSION,
            spec: spec.clone(),
        },
        stats,
        records: sim.records,
        final_nodes,
    })
}

fn validate_draw_plan(spec: &SimSpec) -> Result<(), SimError> {
    let DrawPlan::Scripted { nodes } = &spec.draw_plan else {
        return Ok(());
    };
    let mut seen = BTreeSet::new();
    for nd in nodes {
        if !spec.config.is_member(nd.node) {
            return Err(SimError::DrawPlan(format!(
                "node {} is not a cluster member",
                nd.node
            )));
        }
        if nd.draws.is_empty() {
            return Err(SimError::DrawPlan(format!(
                "node {} has an empty draw script",
                nd.node
            )));
        }
        if !seen.insert(nd.node) {
            return Err(SimError::DrawPlan(format!("node {} is scripted twice", nd.node)));
        }
    }
    for id in spec.config.membership() {
        if !seen.contains(&id) {
            return Err(SimError::DrawPlan(format!("node {id} has no draw script")));
        }
    }
    Ok(())
}

impl Sim {
    fn push(&mut self, at: u64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.insert((at, seq), kind);
    }

    fn record(&mut self, node: NodeId, event: TraceEvent) {
        let round = self.nodes[&node].round;
        self.max_round = self.max_round.max(round);
        let seq = self.records.len() as u64;
        self.records.push(TraceRecord {
            at: self.now,
            seq,
            node,
            round,
            event,
        });
    }

    fn dispatch(&mut self, kind: EventKind) -> Result<(), SimError> {
        match kind {
            EventKind::Fault(fault, node) => self.inject_fault(fault, node),
            EventKind::Deliver(msg) => {
                if !self.alive.contains(&msg.to) {
                    // Crash-stop: a down node's mailbox is a black hole.
                    return Ok(());
                }
                let node = msg.to;
                let before = self.nodes[&node].mode;
                let step = {
                    let state = self.nodes.get_mut(&node).expect("member");
                    let draws = self.draws.get_mut(&node).expect("member");
                    state
                        .apply(&Input::Deliver(msg.clone()), self.now, draws.as_mut(), &self.cfg)
                        .expect("deliveries are infallible")
                };
                self.record(
                    node,
                    TraceEvent::Recv {
                        msg,
                        dropped: step.dropped,
                    },
                );
                self.finish_op(node, before, step)
            }
            EventKind::DrawTick(node) => {
                self.tick_pending.remove(&node);
                if !self.alive.contains(&node) {
                    return Ok(());
                }
                let state = &self.nodes[&node];
                if state.mode != NodeMode::Basic || !state.drawing_enabled {
                    // The chain of ticks dies here; any later operation that
                    // re-enables drawing re-arms it.
                    return Ok(());
                }
                let before = state.mode;
                let value = self.draws.get_mut(&node).expect("member").next_draw();
                let step = {
                    let state = self.nodes.get_mut(&node).expect("member");
                    state
                        .on_draw(value, self.now, &self.cfg)
                        .map_err(|source| SimError::Protocol {
                            at: self.now,
                            source,
                        })?
                };
                self.record(node, TraceEvent::Draw { value });
                self.finish_op(node, before, step)
            }
            EventKind::TimerCheck(node) => {
                if !self.alive.contains(&node) {
                    return Ok(());
                }
                let before = self.nodes[&node].mode;
                let step = {
                    let state = self.nodes.get_mut(&node).expect("member");
                    let draws = self.draws.get_mut(&node).expect("member");
                    state.on_timeout(self.now, draws.as_mut(), &self.cfg)
                };
                self.finish_op(node, before, step)
            }
        }
    }

    fn inject_fault(&mut self, fault: FaultKind, node: NodeId) -> Result<(), SimError> {
        match fault {
            FaultKind::Crash => {
                if !self.alive.remove(&node) {
                    return Err(SimError::BadFault {
                        at: self.now,
                        node,
                        reason: "crash of a node that is already down",
                    });
                }
                self.nodes.get_mut(&node).expect("member").fault_crash();
                self.record(node, TraceEvent::Crash);
                if self.current.map(|(l, _)| l) == Some(node) {
                    // The sitting leader died: leadership is no longer stable.
                    self.settled_since = None;
                }
                let alive = self.alive.clone();
                for (&id, st) in self.nodes.iter_mut() {
                    if alive.contains(&id) {
                        st.known_up.remove(&node);
                    }
                }
                Ok(())
            }
            FaultKind::Recover => {
                if !self.alive.insert(node) {
                    return Err(SimError::BadFault {
                        at: self.now,
                        node,
                        reason: "recovery of a node that is up",
                    });
                }
                let alive = self.alive.clone();
                let now = self.now;
                {
                    let st = self.nodes.get_mut(&node).expect("member");
                    st.fault_recover(now, &self.cfg);
                    st.known_up = alive.clone();
                }
                self.record(node, TraceEvent::Recover);
                for (&id, st) in self.nodes.iter_mut() {
                    if alive.contains(&id) {
                        st.known_up.insert(node);
                    }
                }
                self.schedule_followups(node);
                Ok(())
            }
        }
    }

    /// Trace and schedule everything an operation produced, in causal order:
    /// fired timeouts, the mode change, leadership, then outgoing messages.
    fn finish_op(
        &mut self,
        node: NodeId,
        mode_before: NodeMode,
        step: crate::election::Step,
    ) -> Result<(), SimError> {
        for kind in &step.timeouts {
            self.record(node, TraceEvent::Timeout { kind: *kind });
        }
        let mode_after = self.nodes[&node].mode;
        if mode_before != mode_after {
            self.record(
                node,
                TraceEvent::StateChange {
                    from: mode_before,
                    to: mode_after,
                },
            );
            if mode_after == NodeMode::Candidate {
                self.candidacies += 1;
                let launch_round = self.nodes[&node].round;
                self.candidate_rounds
                    .entry(launch_round)
                    .or_default()
                    .insert(node);
                if let Some((_, r)) = self.current {
                    if self.nodes[&node].round > r {
                        // Election activity beyond the settled round: the
                        // stable-leader window must wait for it to resolve.
                        self.settled_since = None;
                    }
                }
            }
            if mode_after == NodeMode::Leader {
                self.record(node, TraceEvent::Elected { leader: node });
            }
        }
        for msg in step.messages {
            self.record(node, TraceEvent::Send { msg: msg.clone() });
            *self.messages_by_kind.entry(msg.kind.tag()).or_insert(0) += 1;
            // Exhausting a scripted channel is a runtime error by design:
            // a scenario script that stops covering its own sends is stale.
            let delay = self.latency.delay(msg.from, msg.to)?;
            self.push(self.now + delay, EventKind::Deliver(msg));
        }
        self.track_acknowledgement(node);
        self.schedule_followups(node);
        Ok(())
    }

    fn track_acknowledgement(&mut self, node: NodeId) {
        let st = &self.nodes[&node];
        let Some(leader) = st.leader else { return };
        let key = (leader, st.round);
        let acks = self.acks.entry(key).or_default();
        acks.insert(node);
        if acks.len() >= self.cfg.majority() && self.quorate.insert(key) {
            if self.first_election_ms.is_none() {
                self.first_election_ms = Some(self.now);
            }
            if self.current.map_or(true, |(_, r)| key.1 >= r) {
                self.current = Some(key);
            }
            self.settled_since = Some(self.now);
        }
    }

    fn schedule_followups(&mut self, node: NodeId) {
        let st = &self.nodes[&node];
        let wants_tick = st.mode == NodeMode::Basic && st.drawing_enabled;
        let deadline = st.next_deadline();
        if self.alive.contains(&node) && wants_tick && !self.tick_pending.contains(&node) {
            self.tick_pending.insert(node);
            self.push(self.now + self.cfg.draw_period_ms, EventKind::DrawTick(node));
        }
        if let Some(d) = deadline {
            self.push(d.max(self.now), EventKind::TimerCheck(node));
        }
    }

    fn build_stats(&self) -> RunStats {
        let messages_by_kind: BTreeMap<String, usize> = self
            .messages_by_kind
            .iter()
            .map(|(&k, &v)| (k.to_string(), v))
            .collect();
        let messages_total: usize = messages_by_kind.values().sum();
        let heartbeats = messages_by_kind.get("heartbeat").copied().unwrap_or(0);
        let elected = self.first_election_ms.is_some();
        let candidates_seen = self
            .current
            .and_then(|(_, r)| self.candidate_rounds.get(&r))
            .map_or(0, BTreeSet::len);
        RunStats {
            elected,
            leader: self.current.map(|(l, _)| l),
            round: self.current.map(|(_, r)| r),
            election_ms: self.first_election_ms,
            candidacies: self.candidacies,
            candidates_seen,
            rounds_used: self.max_round.0 + 1,
            messages_total,
            non_heartbeat_messages: messages_total - heartbeats,
            messages_by_kind,
            blocked: !elected && self.alive.len() < self.cfg.majority(),
            alive_at_stop: self.alive.len(),
            finished_at: self.now,
        }
    }
}

/// How a replay compared to the recorded trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayReport {
    Identical { records: usize },
    /// `line` is the 1-based line number in the trace file (the header is
    /// line 1).
    Diverged {
        line: usize,
        recorded: String,
        replayed: String,
    },
}

/// Re-run the header's spec and compare against the recorded record lines.
pub fn replay(header: &TraceHeader, recorded: &[String]) -> Result<ReplayReport, SimError> {
    if header.format_version != FORMAT_VERSION {
        return Err(SimError::BadFormatVersion {
            found: header.format_version,
        });
    }
    let outcome = run(&header.spec)?;
    let replayed: Vec<String> = outcome
        .records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes"))
        .collect();
    let n = recorded.len().max(replayed.len());
    for i in 0..n {
        let rec = recorded.get(i).map(String::as_str).unwrap_or("<missing>");
        let rep = replayed.get(i).map(String::as_str).unwrap_or("<missing>");
        if rec != rep {
            return Ok(ReplayReport::Diverged {
                line: i + 2,
                recorded: rec.to_string(),
                replayed: rep.to_string(),
            });
        }
    }
    Ok(ReplayReport::Identical {
        records: replayed.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeded_spec(seed: u64) -> SimSpec {
        SimSpec {
            config: ElectionConfig::default(),
            seed,
            latency: LatencyModel::Fixed { ms: 1 },
            draw_plan: DrawPlan::Seeded,
            faults: vec![],
            stop: StopRule::default(),
        }
    }

    #[test]
    fn a_seeded_run_elects_exactly_one_leader() {
        let outcome = run(&seeded_spec(42)).unwrap();
        assert!(outcome.stats.elected);
        let leader = outcome.stats.leader.unwrap();
        let elected: Vec<_> = outcome
            .records
            .iter()
            .filter(|r| matches!(r.event, TraceEvent::Elected { .. }))
            .collect();
        assert_eq!(elected.len(), 1);
        assert_eq!(elected[0].node, leader);
        // Every live node follows the same leader at the end.
        for n in &outcome.final_nodes {
            assert_eq!(n.leader, Some(leader));
        }
        assert!(outcome.stats.election_ms.unwrap() <= outcome.stats.finished_at);
    }

    #[test]
    fn identical_specs_produce_identical_traces() {
        let a = run(&seeded_spec(7)).unwrap();
        let b = run(&seeded_spec(7)).unwrap();
        assert_eq!(a.trace_lines(), b.trace_lines());
        let c = run(&seeded_spec(8)).unwrap();
        assert_ne!(a.trace_lines(), c.trace_lines());
    }

    #[test]
    fn replay_matches_and_finds_corruption() {
        let outcome = run(&seeded_spec(7)).unwrap();
        let lines = outcome.trace_lines();
        let records = lines[1..].to_vec();
        let report = replay(&outcome.header, &records).unwrap();
        assert_eq!(
            report,
            ReplayReport::Identical {
                records: records.len()
            }
        );

        let mut corrupted = records.clone();
        corrupted[3] = corrupted[3].replace(':', " :");
        match replay(&outcome.header, &corrupted).unwrap() {
            ReplayReport::Diverged { line, .. } => assert_eq!(line, 5),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn crashed_leader_is_replaced() {
        let first = run(&seeded_spec(3)).unwrap();
        let leader = first.stats.leader.unwrap();
        let crash_at = first.stats.election_ms.unwrap() + 40;
        let mut spec = seeded_spec(3);
        spec.faults = vec![FaultEvent {
            at: crash_at,
            node: leader,
            kind: FaultKind::Crash,
        }];
        let second = run(&spec).unwrap();
        assert!(second.stats.elected);
        let new_leader = second.stats.leader.unwrap();
        assert_ne!(new_leader, leader, "a dead node cannot keep leading");
        assert!(second.stats.round.unwrap() > first.stats.round.unwrap());
        for n in &second.final_nodes {
            if n.id != leader {
                assert_eq!(n.leader, Some(new_leader));
            }
        }
    }

    #[test]
    fn in_flight_messages_survive_the_sender_crashing() {
        // The candidate crashes right after its proposals go out: the
        // proposals still arrive, voters grant a dead node, and the cluster
        // must escape via timeouts into a later round. Faults at an instant
        // run before that instant's deliveries, so one tick after the launch
        // is exactly "proposals in flight".
        let first = run(&seeded_spec(11)).unwrap();
        let candidate = first
            .records
            .iter()
            .find_map(|r| match r.event {
                TraceEvent::StateChange {
                    to: NodeMode::Candidate,
                    ..
                } => Some((r.node, r.at)),
                _ => None,
            })
            .unwrap();
        let mut spec = seeded_spec(11);
        spec.faults = vec![FaultEvent {
            at: candidate.1 + 1,
            node: candidate.0,
            kind: FaultKind::Crash,
        }];
        let outcome = run(&spec).unwrap();
        assert!(outcome.stats.elected);
        assert_ne!(outcome.stats.leader, Some(candidate.0));
        let delivered_from_dead = outcome.records.iter().any(|r| {
            matches!(&r.event, TraceEvent::Recv { msg, .. } if msg.from == candidate.0)
        });
        assert!(delivered_from_dead, "proposals outlive their sender");
    }

    #[test]
    fn minority_cluster_stays_blocked() {
        let mut spec = seeded_spec(5);
        spec.faults = (2..5)
            .map(|i| FaultEvent {
                at: 0,
                node: NodeId(i),
                kind: FaultKind::Crash,
            })
            .collect();
        spec.stop = StopRule::MaxTime { max_time_ms: 1_000 };
        let outcome = run(&spec).unwrap();
        assert!(!outcome.stats.elected);
        assert!(outcome.stats.blocked);
        assert_eq!(outcome.stats.candidacies, 0);
        assert_eq!(outcome.stats.messages_total, 0);
    }

    #[test]
    fn recovery_restores_progress() {
        let mut spec = seeded_spec(5);
        spec.faults = (2..5)
            .map(|i| FaultEvent {
                at: 0,
                node: NodeId(i),
                kind: FaultKind::Crash,
            })
            .collect();
        spec.faults.push(FaultEvent {
            at: 500,
            node: NodeId(2),
            kind: FaultKind::Recover,
        });
        let outcome = run(&spec).unwrap();
        assert!(outcome.stats.elected, "three live nodes are a majority");
        assert!(outcome.stats.election_ms.unwrap() > 500);
    }

    #[test]
    fn bad_faults_are_rejected() {
        let mut spec = seeded_spec(1);
        spec.faults = vec![FaultEvent {
            at: 0,
            node: NodeId(9),
            kind: FaultKind::Crash,
        }];
        assert!(matches!(run(&spec), Err(SimError::BadFault { .. })));

        let mut spec = seeded_spec(1);
        spec.faults = vec![FaultEvent {
            at: 5,
            node: NodeId(0),
            kind: FaultKind::Recover,
        }];
        assert!(matches!(
            run(&spec),
            Err(SimError::BadFault {
                reason: "recovery of a node that is up",
                ..
            })
        ));
    }

    #[test]
    fn scripted_plans_must_cover_every_member() {
        let mut spec = seeded_spec(1);
        spec.draw_plan = DrawPlan::Scripted {
            nodes: vec![NodeDraws {
                node: NodeId(0),
                draws: vec![DrawValue::from_micros(500_000).unwrap()],
            }],
        };
        assert!(matches!(run(&spec), Err(SimError::DrawPlan(_))));
    }

    #[test]
    fn spec_json_round_trips() {
        let spec = seeded_spec(99);
        let json = serde_json::to_string(&spec).unwrap();
        let back: SimSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
