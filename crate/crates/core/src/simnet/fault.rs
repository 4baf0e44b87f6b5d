use serde::{Deserialize, Serialize};

use crate::election::NodeId;

/// Crash-stop fault injection, scheduled on the virtual clock. A crashed
/// node sends and receives nothing; messages already in flight toward it are
/// lost at delivery time. Recovery brings the node back listening, with its
/// round and vote record intact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultEvent {
    pub at: u64,
    pub node: NodeId,
    pub kind: FaultKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    Crash,
    Recover,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faults_round_trip_as_json() {
        let f = FaultEvent {
            at: 30,
            node: NodeId(2),
            kind: FaultKind::Crash,
        };
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"at":30,"node":2,"kind":"crash"}"#);
        assert_eq!(serde_json::from_str::<FaultEvent>(&json).unwrap(), f);
    }
}
