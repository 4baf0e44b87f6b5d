use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::election::NodeId;
use crate::randomness::SeededRng;

/// How long a message spends in flight. Every delay is at least 1 ms so a
/// send never delivers inside the instant it was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatencyModel {
    /// Every message takes exactly `ms`.
    Fixed { ms: u64 },
    /// Each message independently samples uniformly from `lo_ms..=hi_ms`
    /// using the run's dedicated latency stream.
    UniformRange { lo_ms: u64, hi_ms: u64 },
    /// Exact per-channel delays, consumed first-in first-out per ordered
    /// `(from, to)` pair. Running out is an error: scripts must account for
    /// every send, so a drifting scenario fails loudly instead of silently.
    Scripted { channels: Vec<ChannelDelays> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDelays {
    pub from: NodeId,
    pub to: NodeId,
    pub delays: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatencyError {
    #[error("delays must be at least 1 ms")]
    TooSmall,
    #[error("uniform range needs lo_ms <= hi_ms")]
    BadRange,
    #[error("duplicate scripted channel {from}->{to}")]
    DuplicateChannel { from: NodeId, to: NodeId },
    #[error("no scripted channel {from}->{to}")]
    MissingChannel { from: NodeId, to: NodeId },
    #[error("scripted delays for channel {from}->{to} are exhausted")]
    Exhausted { from: NodeId, to: NodeId },
}

impl LatencyModel {
    pub fn validate(&self) -> Result<(), LatencyError> {
        match self {
            LatencyModel::Fixed { ms } => {
                if *ms == 0 {
                    return Err(LatencyError::TooSmall);
                }
            }
            LatencyModel::UniformRange { lo_ms, hi_ms } => {
                if *lo_ms == 0 {
                    return Err(LatencyError::TooSmall);
                }
                if lo_ms > hi_ms {
                    return Err(LatencyError::BadRange);
                }
            }
            LatencyModel::Scripted { channels } => {
                let mut seen = BTreeMap::new();
                for ch in channels {
                    if ch.delays.iter().any(|&d| d == 0) {
                        return Err(LatencyError::TooSmall);
                    }
                    if seen.insert((ch.from, ch.to), ()).is_some() {
                        return Err(LatencyError::DuplicateChannel {
                            from: ch.from,
                            to: ch.to,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Runtime sampling state; the model itself stays immutable spec data.
    pub(crate) fn into_state(self, latency_rng: SeededRng) -> LatencyState {
        match self {
            LatencyModel::Fixed { ms } => LatencyState::Fixed(ms),
            LatencyModel::UniformRange { lo_ms, hi_ms } => LatencyState::Uniform {
                lo_ms,
                hi_ms,
                rng: latency_rng,
            },
            LatencyModel::Scripted { channels } => LatencyState::Scripted(
                channels
                    .into_iter()
                    .map(|ch| ((ch.from, ch.to), ch.delays.into_iter().collect()))
                    .collect(),
            ),
        }
    }
}

pub(crate) enum LatencyState {
    Fixed(u64),
    Uniform {
        lo_ms: u64,
        hi_ms: u64,
        rng: SeededRng,
    },
    Scripted(BTreeMap<(NodeId, NodeId), VecDeque<u64>>),
}

impl LatencyState {
    pub(crate) fn delay(&mut self, from: NodeId, to: NodeId) -> Result<u64, LatencyError> {
        match self {
            LatencyState::Fixed(ms) => Ok(*ms),
            LatencyState::Uniform { lo_ms, hi_ms, rng } => Ok(rng.uniform_inclusive(*lo_ms, *hi_ms)),
            LatencyState::Scripted(channels) => {
                let queue = channels
                    .get_mut(&(from, to))
                    .ok_or(LatencyError::MissingChannel { from, to })?;
                queue
                    .pop_front()
                    .ok_or(LatencyError::Exhausted { from, to })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_delays_are_rejected() {
        assert_eq!(
            LatencyModel::Fixed { ms: 0 }.validate(),
            Err(LatencyError::TooSmall)
        );
        assert_eq!(
            LatencyModel::UniformRange { lo_ms: 0, hi_ms: 4 }.validate(),
            Err(LatencyError::TooSmall)
        );
        assert_eq!(
            LatencyModel::UniformRange { lo_ms: 5, hi_ms: 4 }.validate(),
            Err(LatencyError::BadRange)
        );
        let scripted = LatencyModel::Scripted {
            channels: vec![ChannelDelays {
                from: NodeId(0),
                to: NodeId(1),
                delays: vec![1, 0],
            }],
        };
        assert_eq!(scripted.validate(), Err(LatencyError::TooSmall));
    }

    #[test]
    fn duplicate_channels_are_rejected() {
        let ch = |d: Vec<u64>| ChannelDelays {
            from: NodeId(0),
            to: NodeId(1),
            delays: d,
        };
        let m = LatencyModel::Scripted {
            channels: vec![ch(vec![1]), ch(vec![2])],
        };
        assert_eq!(
            m.validate(),
            Err(LatencyError::DuplicateChannel {
                from: NodeId(0),
                to: NodeId(1)
            })
        );
    }

    #[test]
    fn scripted_delays_pop_in_order_and_exhaust_loudly() {
        let m = LatencyModel::Scripted {
            channels: vec![ChannelDelays {
                from: NodeId(0),
                to: NodeId(1),
                delays: vec![3, 1],
            }],
        };
        m.validate().unwrap();
        let mut st = m.into_state(SeededRng::new(0));
        assert_eq!(st.delay(NodeId(0), NodeId(1)), Ok(3));
        assert_eq!(st.delay(NodeId(0), NodeId(1)), Ok(1));
        assert_eq!(
            st.delay(NodeId(0), NodeId(1)),
            Err(LatencyError::Exhausted {
                from: NodeId(0),
                to: NodeId(1)
            })
        );
        assert_eq!(
            st.delay(NodeId(1), NodeId(0)),
            Err(LatencyError::MissingChannel {
                from: NodeId(1),
                to: NodeId(0)
            })
        );
    }

    #[test]
    fn uniform_sampling_stays_in_range_and_replays_by_seed() {
        let m = LatencyModel::UniformRange { lo_ms: 1, hi_ms: 3 };
        m.validate().unwrap();
        let mut a = m.clone().into_state(SeededRng::new(7));
        let mut b = m.into_state(SeededRng::new(7));
        for _ in 0..1000 {
            let d = a.delay(NodeId(0), NodeId(1)).unwrap();
            assert!((1..=3).contains(&d));
            assert_eq!(d, b.delay(NodeId(0), NodeId(1)).unwrap());
        }
    }

    #[test]
    fn model_serializes_with_a_tag() {
        let m = LatencyModel::UniformRange { lo_ms: 1, hi_ms: 3 };
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"model":"uniform_range","lo_ms":1,"hi_ms":3}"#);
        let back: LatencyModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
