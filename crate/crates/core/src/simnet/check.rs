//! Structural invariant checking over recorded traces.
//!
//! The state machine's unit tests argue each rule locally; this pass argues
//! globally, over whole runs, from nothing but the trace: one leader per
//! round, silence while down, monotone vote grants, candidacies backed by
//! real qualifying streaks. It is used by tests over large batches of seeded
//! runs, and by anyone auditing a trace file.

use std::collections::{BTreeMap, BTreeSet};

use crate::election::{DrawValue, MessageKind, NodeId, NodeMode, RoundNumber};

use super::trace::{TraceEvent, TraceHeader, TraceRecord};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CheckViolation {
    #[error("record {seq}: time went backwards ({prev} -> {at})")]
    TimeBackwards { seq: u64, prev: u64, at: u64 },
    #[error("record at index {index} carries seq {found}")]
    SeqMismatch { index: usize, found: u64 },
    #[error("round {round} elected two leaders: {first} and {second}")]
    DualLeader {
        round: RoundNumber,
        first: NodeId,
        second: NodeId,
    },
    #[error("record {seq}: node {node} acted while down")]
    ActedWhileDown { seq: u64, node: NodeId },
    #[error("record {seq}: message round {msg_round} differs from sender round {round}")]
    SendRoundMismatch {
        seq: u64,
        msg_round: RoundNumber,
        round: RoundNumber,
    },
    #[error("record {seq}: node {node} granted {next} after {prev}, not strictly greater")]
    NonMonotoneGrant {
        seq: u64,
        node: NodeId,
        prev: DrawValue,
        next: DrawValue,
    },
    #[error("record {seq}: node {node} voted twice in one round under single-vote rules")]
    DoubleVote { seq: u64, node: NodeId },
    #[error("record {seq}: positive vote to {to} without a matching proposal")]
    VoteWithoutProposal { seq: u64, to: NodeId },
    #[error("record {seq}: node {node} became candidate with a streak of {streak}, needs {needed}")]
    BadStreak {
        seq: u64,
        node: NodeId,
        streak: u32,
        needed: u32,
    },
    #[error("record {seq}: node {node} proposed {proposed}, but its best draw was {best}")]
    WrongProposalValue {
        seq: u64,
        node: NodeId,
        proposed: DrawValue,
        best: DrawValue,
    },
}

/// Counts gathered during the scan, for assertions beyond pass/fail.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceSummary {
    pub records: usize,
    pub draws_by_node: BTreeMap<NodeId, usize>,
    pub candidacies: usize,
    /// `(at, node, round)` of every leadership assumption, in trace order.
    pub elections: Vec<(u64, NodeId, RoundNumber)>,
    pub sends_by_kind: BTreeMap<String, usize>,
    pub non_heartbeat_sends: usize,
}

/// Scan `records` against the invariants implied by `header`'s config.
pub fn check_trace(
    header: &TraceHeader,
    records: &[TraceRecord],
) -> Result<TraceSummary, CheckViolation> {
    let cfg = &header.spec.config;
    let mut summary = TraceSummary {
        records: records.len(),
        ..TraceSummary::default()
    };

    let mut prev_at = 0u64;
    let mut down: BTreeSet<NodeId> = BTreeSet::new();
    let mut leader_of_round: BTreeMap<RoundNumber, NodeId> = BTreeMap::new();
    // Streak and best draw per (node, round), rebuilt from draw records.
    let mut streak: BTreeMap<(NodeId, RoundNumber), u32> = BTreeMap::new();
    let mut best: BTreeMap<(NodeId, RoundNumber), DrawValue> = BTreeMap::new();
    // Latest granted value per (node, round) and positive votes cast.
    let mut granted: BTreeMap<(NodeId, RoundNumber), DrawValue> = BTreeMap::new();
    let mut votes_cast: BTreeMap<(NodeId, RoundNumber), usize> = BTreeMap::new();
    // Last proposal each node received (same-instant lookup for vote sends).
    let mut last_proposal: BTreeMap<NodeId, (NodeId, RoundNumber, DrawValue)> = BTreeMap::new();

    for (index, rec) in records.iter().enumerate() {
        if rec.seq != index as u64 {
            return Err(CheckViolation::SeqMismatch {
                index,
                found: rec.seq,
            });
        }
        if rec.at < prev_at {
            return Err(CheckViolation::TimeBackwards {
                seq: rec.seq,
                prev: prev_at,
                at: rec.at,
            });
        }
        prev_at = rec.at;

        match &rec.event {
            TraceEvent::Crash => {
                down.insert(rec.node);
                continue;
            }
            TraceEvent::Recover => {
                down.remove(&rec.node);
                continue;
            }
            _ => {
                if down.contains(&rec.node) {
                    return Err(CheckViolation::ActedWhileDown {
                        seq: rec.seq,
                        node: rec.node,
                    });
                }
            }
        }

        let key = (rec.node, rec.round);
        match &rec.event {
            TraceEvent::Draw { value } => {
                *summary.draws_by_node.entry(rec.node).or_insert(0) += 1;
                let s = streak.entry(key).or_insert(0);
                if *value > cfg.threshold {
                    *s += 1;
                } else {
                    *s = 0;
                }
                let b = best.entry(key).or_insert(*value);
                *b = (*b).max(*value);
            }
            TraceEvent::StateChange { from, to } => {
                if *to == NodeMode::Candidate {
                    summary.candidacies += 1;
                    let have = streak.get(&key).copied().unwrap_or(0);
                    if have < cfg.streak_len {
                        return Err(CheckViolation::BadStreak {
                            seq: rec.seq,
                            node: rec.node,
                            streak: have,
                            needed: cfg.streak_len,
                        });
                    }
                }
                if *from == NodeMode::Candidate || *to == NodeMode::Candidate {
                    // Launching resets the machine's counter; abandoning does
                    // too. Mirror it so a relaunch needs a fresh streak.
                    streak.insert(key, 0);
                }
            }
            TraceEvent::Recv { msg, dropped } => {
                if dropped.is_none() {
                    match msg.kind {
                        MessageKind::Proposal { value } => {
                            last_proposal.insert(rec.node, (msg.from, msg.round, value));
                        }
                        MessageKind::Heartbeat { .. } => {
                            // Heartbeats stop the draw cycle and zero the
                            // streak.
                            streak.insert(key, 0);
                        }
                        _ => {}
                    }
                }
            }
            TraceEvent::Send { msg } => {
                *summary
                    .sends_by_kind
                    .entry(msg.kind.tag().to_string())
                    .or_insert(0) += 1;
                if !msg.kind.is_heartbeat() {
                    summary.non_heartbeat_sends += 1;
                }
                if msg.round != rec.round {
                    return Err(CheckViolation::SendRoundMismatch {
                        seq: rec.seq,
                        msg_round: msg.round,
                        round: rec.round,
                    });
                }
                match msg.kind {
                    MessageKind::Proposal { value } => {
                        // A proposal stands in for the self-vote.
                        if let Some(&prev) = granted.get(&key) {
                            if value < prev {
                                return Err(CheckViolation::NonMonotoneGrant {
                                    seq: rec.seq,
                                    node: rec.node,
                                    prev,
                                    next: value,
                                });
                            }
                        }
                        granted.insert(key, value);
                        if let Some(&b) = best.get(&key) {
                            if value != b {
                                return Err(CheckViolation::WrongProposalValue {
                                    seq: rec.seq,
                                    node: rec.node,
                                    proposed: value,
                                    best: b,
                                });
                            }
                        }
                    }
                    MessageKind::PositiveVote { .. } => {
                        let Some(&(from, p_round, value)) = last_proposal.get(&rec.node) else {
                            return Err(CheckViolation::VoteWithoutProposal {
                                seq: rec.seq,
                                to: msg.to,
                            });
                        };
                        if from != msg.to || p_round != rec.round {
                            return Err(CheckViolation::VoteWithoutProposal {
                                seq: rec.seq,
                                to: msg.to,
                            });
                        }
                        streak.insert(key, 0);
                        let n = votes_cast.entry(key).or_insert(0);
                        *n += 1;
                        if cfg.optimized && *n > 1 {
                            return Err(CheckViolation::DoubleVote {
                                seq: rec.seq,
                                node: rec.node,
                            });
                        }
                        if let Some(&prev) = granted.get(&key) {
                            if value <= prev {
                                return Err(CheckViolation::NonMonotoneGrant {
                                    seq: rec.seq,
                                    node: rec.node,
                                    prev,
                                    next: value,
                                });
                            }
                        }
                        granted.insert(key, value);
                    }
                    _ => {}
                }
            }
            TraceEvent::Elected { leader } => {
                summary.elections.push((rec.at, *leader, rec.round));
                match leader_of_round.get(&rec.round) {
                    Some(&first) if first != *leader => {
                        return Err(CheckViolation::DualLeader {
                            round: rec.round,
                            first,
                            second: *leader,
                        });
                    }
                    _ => {
                        leader_of_round.insert(rec.round, *leader);
                    }
                }
            }
            TraceEvent::Timeout { .. } | TraceEvent::Crash | TraceEvent::Recover => {}
        }
    }

    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simnet::runner::{run, DrawPlan, SimSpec, StopRule};
    use crate::simnet::LatencyModel;
    use crate::election::ElectionConfig;

    fn outcome(seed: u64) -> (TraceHeader, Vec<TraceRecord>) {
        let spec = SimSpec {
            config: ElectionConfig::default(),
            seed,
            latency: LatencyModel::UniformRange { lo_ms: 1, hi_ms: 3 },
            draw_plan: DrawPlan::Seeded,
            faults: vec![],
            stop: StopRule::default(),
        };
        let out = run(&spec).unwrap();
        (out.header, out.records)
    }

    #[test]
    fn clean_runs_pass_every_invariant() {
        for seed in 0..20 {
            let (header, records) = outcome(seed);
            let summary = check_trace(&header, &records).unwrap();
            assert_eq!(summary.records, records.len());
            assert!(!summary.elections.is_empty());
        }
    }

    #[test]
    fn tampered_seq_is_caught() {
        let (header, mut records) = outcome(1);
        records[4].seq = 99;
        assert!(matches!(
            check_trace(&header, &records),
            Err(CheckViolation::SeqMismatch { index: 4, .. })
        ));
    }

    #[test]
    fn duplicate_leaders_in_a_round_are_caught() {
        let (header, mut records) = outcome(1);
        let elected_at = records
            .iter()
            .position(|r| matches!(r.event, TraceEvent::Elected { .. }))
            .unwrap();
        let mut forged = records[elected_at].clone();
        let other = NodeId(if forged.node.0 == 0 { 1 } else { 0 });
        forged.node = other;
        forged.event = TraceEvent::Elected { leader: other };
        forged.seq = records.last().unwrap().seq + 1;
        forged.at = records.last().unwrap().at;
        records.push(forged);
        assert!(matches!(
            check_trace(&header, &records),
            Err(CheckViolation::DualLeader { .. })
        ));
    }

    #[test]
    fn activity_while_down_is_caught() {
        let (header, mut records) = outcome(2);
        let n = records[0].node;
        let mut crash = records[0].clone();
        crash.event = TraceEvent::Crash;
        crash.at = 0;
        crash.seq = 0;
        // Splice a crash of the first acting node in front of everything and
        // renumber; its next action must now violate the silence rule.
        records.insert(0, crash);
        for (i, r) in records.iter_mut().enumerate() {
            r.seq = i as u64;
        }
        let err = check_trace(&header, &records).unwrap_err();
        assert_eq!(
            err,
            CheckViolation::ActedWhileDown { seq: 1, node: n },
        );
    }
}
