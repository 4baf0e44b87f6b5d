use serde::{Deserialize, Serialize};

use super::types::{DrawValue, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("cluster needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("threshold must be strictly inside (0, 1)")]
    BadThreshold,
    #[error("streak length must be at least 1")]
    BadStreakLen,
    #[error("{0} must be positive")]
    ZeroDuration(&'static str),
    #[error("membership must be exactly the ids 0..{expected}, got {got:?}")]
    BadMembership { expected: u32, got: Vec<u32> },
    #[error("node {0} is not a cluster member")]
    NotAMember(NodeId),
}

/// Protocol parameters shared by every node in a run.
///
/// Durations are virtual milliseconds. The defaults elect in a few hundred
/// milliseconds of virtual time: one draw per millisecond against threshold
/// 0.85 needs on average ~347 draws to produce a 3-streak.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectionConfig {
    /// Cluster size `v`.
    pub nodes: u32,
    /// A draw counts toward a streak iff it is strictly greater than this.
    pub threshold: DrawValue,
    /// Consecutive above-threshold draws required to launch a candidacy.
    pub streak_len: u32,
    /// Virtual milliseconds between successive draws at one node.
    pub draw_period_ms: u64,
    /// How long a candidate waits for vote responses before tallying.
    pub vote_timeout_ms: u64,
    /// How long a coordinator waits for the announced leader's first
    /// heartbeat before re-spinning the wheel.
    pub leader_ack_timeout_ms: u64,
    /// Leader heartbeat broadcast period.
    pub heartbeat_interval_ms: u64,
    /// Heartbeats missed in a row before a follower declares the leader dead.
    pub leader_miss_limit: u32,
    /// Single-vote-per-round mode: vote for the first candidacy seen in a
    /// round and refuse every later one, instead of re-granting bigger values.
    pub optimized: bool,
}

impl Default for ElectionConfig {
    fn default() -> Self {
        ElectionConfig {
            nodes: 5,
            threshold: DrawValue::from_micros(850_000).unwrap(),
            streak_len: 3,
            draw_period_ms: 1,
            vote_timeout_ms: 50,
            leader_ack_timeout_ms: 20,
            heartbeat_interval_ms: 25,
            leader_miss_limit: 3,
            optimized: false,
        }
    }
}

impl ElectionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.nodes < 3 {
            return Err(ConfigError::TooFewNodes(self.nodes as usize));
        }
        // DrawValue is already confined to (0, 1); nothing more to check there.
        if self.streak_len == 0 {
            return Err(ConfigError::BadStreakLen);
        }
        for (name, ms) in [
            ("draw_period_ms", self.draw_period_ms),
            ("vote_timeout_ms", self.vote_timeout_ms),
            ("leader_ack_timeout_ms", self.leader_ack_timeout_ms),
            ("heartbeat_interval_ms", self.heartbeat_interval_ms),
            ("leader_miss_limit", self.leader_miss_limit as u64),
        ] {
            if ms == 0 {
                return Err(ConfigError::ZeroDuration(name));
            }
        }
        Ok(())
    }

    /// Members are the dense ids `0..nodes`.
    pub fn membership(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes).map(NodeId)
    }

    pub fn is_member(&self, id: NodeId) -> bool {
        id.0 < self.nodes
    }

    /// Votes needed to win: floor(v / 2) + 1, the candidate's self-vote included.
    pub fn majority(&self) -> usize {
        (self.nodes as usize) / 2 + 1
    }

    /// Silence window after which a follower declares the leader dead.
    pub fn leader_silence_ms(&self) -> u64 {
        self.leader_miss_limit as u64 * self.heartbeat_interval_ms
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_match_documented_values() {
        let c = ElectionConfig::default();
        c.validate().unwrap();
        assert_eq!(c.nodes, 5);
        assert_eq!(c.threshold.micros(), 850_000);
        assert_eq!(c.streak_len, 3);
        assert_eq!(c.draw_period_ms, 1);
        assert_eq!(c.vote_timeout_ms, 50);
        assert_eq!(c.leader_ack_timeout_ms, 20);
        assert_eq!(c.heartbeat_interval_ms, 25);
        assert_eq!(c.leader_miss_limit, 3);
        assert!(!c.optimized);
    }

    #[test]
    fn majority_is_floor_half_plus_one() {
        let mut c = ElectionConfig::default();
        for (v, m) in [(3u32, 2usize), (4, 3), (5, 3), (6, 4), (7, 4)] {
            c.nodes = v;
            assert_eq!(c.majority(), m, "v={v}");
        }
    }

    #[test]
    fn small_clusters_are_rejected() {
        let mut c = ElectionConfig::default();
        c.nodes = 2;
        assert_eq!(c.validate(), Err(ConfigError::TooFewNodes(2)));
    }

    #[test]
    fn zero_durations_are_rejected() {
        let mut c = ElectionConfig::default();
        c.vote_timeout_ms = 0;
        assert!(matches!(c.validate(), Err(ConfigError::ZeroDuration(_))));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let json = serde_json::to_string(&ElectionConfig::default()).unwrap();
        let patched = json.replace("\"optimized\"", "\"optimised_extra\":1,\"optimized\"");
        assert!(serde_json::from_str::<ElectionConfig>(&patched).is_err());
    }

    #[test]
    fn leader_silence_is_miss_limit_times_interval() {
        let c = ElectionConfig::default();
        assert_eq!(c.leader_silence_ms(), 75);
    }
}
