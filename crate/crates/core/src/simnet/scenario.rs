//! Scripted, exactly-reproducible runs with verified postconditions.
//!
//! Each scenario is a strategy object: it knows its name, builds its own
//! [`SimSpec`] (scripted draws and per-channel latencies, so every beat lands
//! on a known millisecond), and checks the outcome it promises. The registry
//! is the single lookup point; the command-line front end selects scenarios
//! from it by name.

use crate::election::{DrawValue, ElectionConfig, MessageKind, NodeId, NodeMode, RoundNumber};

use super::latency::{ChannelDelays, LatencyModel};
use super::runner::{run, DrawPlan, NodeDraws, SimOutcome, SimError, SimSpec, StopRule};
use super::trace::TraceEvent;

pub trait Scenario: Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn spec(&self) -> SimSpec;
    /// Check every postcondition the scenario documents; the `Err` names the
    /// first one that failed.
    fn verify(&self, outcome: &SimOutcome) -> Result<(), String>;
}

pub fn registry() -> &'static [&'static dyn Scenario] {
    &[&SingleCandidate, &DuelingCandidates]
}

pub fn find(name: &str) -> Option<&'static dyn Scenario> {
    registry().iter().copied().find(|s| s.name() == name)
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("postcondition failed: {0}")]
    Postcondition(String),
}

/// Run a scenario and verify its postconditions.
pub fn run_scenario(scenario: &dyn Scenario) -> Result<SimOutcome, ScenarioError> {
    let outcome = run(&scenario.spec())?;
    scenario
        .verify(&outcome)
        .map_err(ScenarioError::Postcondition)?;
    Ok(outcome)
}

fn v(micros: u32) -> DrawValue {
    DrawValue::from_micros(micros).expect("scenario values are in range")
}

fn scripted(node: u32, micros: &[u32]) -> NodeDraws {
    NodeDraws {
        node: NodeId(node),
        draws: micros.iter().map(|&m| v(m)).collect(),
    }
}

fn channel(from: u32, to: u32, delays: &[u64]) -> ChannelDelays {
    ChannelDelays {
        from: NodeId(from),
        to: NodeId(to),
        delays: delays.to_vec(),
    }
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: expected {want:?}, got {got:?}"))
    }
}

fn send_count(outcome: &SimOutcome, kind: &str) -> usize {
    outcome
        .stats
        .messages_by_kind
        .get(kind)
        .copied()
        .unwrap_or(0)
}

fn draw_count(outcome: &SimOutcome, node: u32) -> usize {
    outcome
        .records
        .iter()
        .filter(|r| r.node == NodeId(node) && matches!(r.event, TraceEvent::Draw { .. }))
        .count()
}

fn mode_changes(outcome: &SimOutcome, node: u32) -> Vec<(u64, NodeMode, NodeMode)> {
    outcome
        .records
        .iter()
        .filter_map(|r| match r.event {
            TraceEvent::StateChange { from, to } if r.node == NodeId(node) => {
                Some((r.at, from, to))
            }
            _ => None,
        })
        .collect()
}

fn elections(outcome: &SimOutcome) -> Vec<(u64, NodeId)> {
    outcome
        .records
        .iter()
        .filter_map(|r| match r.event {
            TraceEvent::Elected { leader } => Some((r.at, leader)),
            _ => None,
        })
        .collect()
}

/// One node reaches its streak alone; nobody contests. The election needs
/// exactly `2v - 1` non-heartbeat messages: `v - 1` proposals out, `v - 1`
/// votes back, one announcement.
///
/// Script (1 ms everywhere, draws every 1 ms): node A draws 0.86, 0.88, 0.90
/// and proposes at t=3 holding 0.90. The others idle far below the 0.85
/// threshold, so all four grant. All votes are back by t=5; A's wheel over
/// (0.90, 0.37, 0.61, 0.55, 0.42) consumes A's next draw 0.50, landing on C,
/// the third segment. C hears the announcement at t=6 and heartbeats; a
/// majority follows it by t=7.
pub struct SingleCandidate;

impl Scenario for SingleCandidate {
    fn name(&self) -> &'static str {
        "single_candidate"
    }

    fn description(&self) -> &'static str {
        "uncontested election: one streak, four grants, wheel picks C, 9 messages"
    }

    fn spec(&self) -> SimSpec {
        SimSpec {
            config: ElectionConfig::default(),
            seed: 1,
            latency: LatencyModel::Fixed { ms: 1 },
            draw_plan: DrawPlan::Scripted {
                nodes: vec![
                    scripted(0, &[860_000, 880_000, 900_000, 500_000]),
                    scripted(1, &[370_000]),
                    scripted(2, &[610_000]),
                    scripted(3, &[550_000]),
                    scripted(4, &[420_000]),
                ],
            },
            faults: vec![],
            stop: StopRule::default(),
        }
    }

    fn verify(&self, outcome: &SimOutcome) -> Result<(), String> {
        let s = &outcome.stats;
        expect("elected", s.elected, true)?;
        expect("leader", s.leader, Some(NodeId(2)))?;
        expect("settled round", s.round, Some(RoundNumber(0)))?;
        expect("election latency", s.election_ms, Some(7))?;
        expect("candidacies", s.candidacies, 1)?;
        expect("candidates in winning round", s.candidates_seen, 1)?;
        expect("rounds used", s.rounds_used, 1)?;
        expect("non-heartbeat messages", s.non_heartbeat_messages, 9)?;
        expect("proposals", send_count(outcome, "proposal"), 4)?;
        expect("positive votes", send_count(outcome, "positive_vote"), 4)?;
        expect("negative votes", send_count(outcome, "negative_vote"), 0)?;
        expect("announcements", send_count(outcome, "announcement"), 1)?;
        for node in 0..5 {
            expect("draws per node", draw_count(outcome, node), 3)?;
        }
        expect("elections", elections(outcome), vec![(6, NodeId(2))])?;
        expect(
            "candidate A path",
            mode_changes(outcome, 0),
            vec![
                (3, NodeMode::Basic, NodeMode::Candidate),
                (5, NodeMode::Candidate, NodeMode::Coordinator),
                (7, NodeMode::Coordinator, NodeMode::Basic),
            ],
        )?;
        for n in &outcome.final_nodes {
            expect("follows C at the end", n.leader, Some(NodeId(2)))?;
        }
        Ok(())
    }
}

/// Two nodes reach their streaks one tick apart and duel. A (0.90) launches
/// at t=3, B (0.93) at t=4. D and E grant A first, then re-grant B's larger
/// value; C's first proposal is B's, so C grants B and refuses A, citing
/// 0.61. A itself grants B at t=7, abandoning its candidacy; B refuses A's
/// late-arriving proposal. B holds all four responses at t=8 and spins a
/// full wheel (0.90, 0.93, 0.61, 0.55, 0.42) with its next draw 0.60,
/// landing on C again.
///
/// The scripted per-channel delays below place every one of those beats;
/// running out of scripted delays is an error, so the scenario fails loudly
/// if the message pattern ever drifts.
pub struct DuelingCandidates;

impl Scenario for DuelingCandidates {
    fn name(&self) -> &'static str {
        "dueling_candidates"
    }

    fn description(&self) -> &'static str {
        "two candidates one tick apart: revotes, refusals, one survivor, wheel picks C"
    }

    fn spec(&self) -> SimSpec {
        SimSpec {
            config: ElectionConfig::default(),
            seed: 1,
            latency: LatencyModel::Scripted {
                channels: vec![
                    channel(0, 1, &[5, 1]),
                    channel(0, 2, &[3]),
                    channel(0, 3, &[1]),
                    channel(0, 4, &[1]),
                    channel(1, 0, &[3, 1]),
                    channel(1, 2, &[1, 1]),
                    channel(1, 3, &[1]),
                    channel(1, 4, &[1]),
                    channel(2, 0, &[1; 8]),
                    channel(2, 1, &[1; 8]),
                    channel(2, 3, &[1; 8]),
                    channel(2, 4, &[1; 8]),
                    channel(3, 0, &[1]),
                    channel(3, 1, &[1]),
                    channel(4, 0, &[1]),
                    channel(4, 1, &[1]),
                ],
            },
            draw_plan: DrawPlan::Scripted {
                nodes: vec![
                    scripted(0, &[870_000, 880_000, 900_000]),
                    scripted(1, &[500_000, 880_000, 910_000, 930_000, 600_000]),
                    scripted(2, &[610_000]),
                    scripted(3, &[550_000]),
                    scripted(4, &[420_000]),
                ],
            },
            faults: vec![],
            stop: StopRule::default(),
        }
    }

    fn verify(&self, outcome: &SimOutcome) -> Result<(), String> {
        let s = &outcome.stats;
        expect("elected", s.elected, true)?;
        expect("leader", s.leader, Some(NodeId(2)))?;
        expect("settled round", s.round, Some(RoundNumber(0)))?;
        expect("election latency", s.election_ms, Some(10))?;
        expect("candidacies", s.candidacies, 2)?;
        expect("candidates in winning round", s.candidates_seen, 2)?;
        expect("rounds used", s.rounds_used, 1)?;
        expect("non-heartbeat messages", s.non_heartbeat_messages, 17)?;
        expect("proposals", send_count(outcome, "proposal"), 8)?;
        expect("positive votes", send_count(outcome, "positive_vote"), 6)?;
        expect("negative votes", send_count(outcome, "negative_vote"), 2)?;
        expect("announcements", send_count(outcome, "announcement"), 1)?;
        for (node, want) in [(0, 3), (1, 4), (2, 4), (3, 3), (4, 3)] {
            expect("draws per node", draw_count(outcome, node), want)?;
        }
        expect("elections", elections(outcome), vec![(9, NodeId(2))])?;

        // A: candidate at 3, grants B and stands aside at 7.
        expect(
            "candidate A path",
            mode_changes(outcome, 0),
            vec![
                (3, NodeMode::Basic, NodeMode::Candidate),
                (7, NodeMode::Candidate, NodeMode::Basic),
            ],
        )?;
        // B: candidate at 4, coordinator at 8, settles once C heartbeats.
        expect(
            "candidate B path",
            mode_changes(outcome, 1),
            vec![
                (4, NodeMode::Basic, NodeMode::Candidate),
                (8, NodeMode::Candidate, NodeMode::Coordinator),
                (10, NodeMode::Coordinator, NodeMode::Basic),
            ],
        )?;

        // D votes for A, then re-votes for B's strictly larger number.
        let d_votes: Vec<(u64, NodeId)> = outcome
            .records
            .iter()
            .filter_map(|r| match &r.event {
                TraceEvent::Send { msg } if r.node == NodeId(3) => match msg.kind {
                    MessageKind::PositiveVote { .. } => Some((r.at, msg.to)),
                    _ => None,
                },
                _ => None,
            })
            .collect();
        expect("D's votes", d_votes, vec![(4, NodeId(0)), (5, NodeId(1))])?;

        // C refuses A outright (it granted B first); B refuses A's proposal.
        let negatives: Vec<(u64, NodeId, NodeId)> = outcome
            .records
            .iter()
            .filter_map(|r| match &r.event {
                TraceEvent::Send { msg } => match msg.kind {
                    MessageKind::NegativeVote { .. } => Some((r.at, msg.from, msg.to)),
                    _ => None,
                },
                _ => None,
            })
            .collect();
        expect(
            "refusals",
            negatives,
            vec![(6, NodeId(2), NodeId(0)), (8, NodeId(1), NodeId(0))],
        )?;

        for n in &outcome.final_nodes {
            expect("follows C at the end", n.leader, Some(NodeId(2)))?;
        }
        Ok(())
    }
}
