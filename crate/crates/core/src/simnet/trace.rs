//! JSON-lines run traces.
//!
//! A trace file is one header line carrying the full run specification,
//! followed by one line per observed event. Replaying the header's spec must
//! reproduce the remaining lines byte for byte; everything in a record is
//! integer-valued or an enum tag, so no float formatting can drift.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::election::{DrawValue, DropReason, Message, NodeId, NodeMode, RoundNumber, TimeoutKind};

use super::runner::SimSpec;

/// Bumped whenever the header or record layout changes shape.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHeader {
    pub format_version: u32,
    pub spec: SimSpec,
}

/// One observed event. `at` is virtual milliseconds, `seq` the global record
/// index; together they totally order the trace. `node` is the acting node
/// and `round` its round number after the event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub at: u64,
    pub seq: u64,
    pub node: NodeId,
    pub round: RoundNumber,
    #[serde(flatten)]
    pub event: TraceEvent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", content = "detail", rename_all = "snake_case")]
pub enum TraceEvent {
    /// The node's periodic draw produced `value`.
    Draw { value: DrawValue },
    /// The node handed `msg` to the network.
    Send { msg: Message },
    /// The network delivered `msg`; `dropped` says why it was ignored, if it
    /// was.
    Recv {
        msg: Message,
        dropped: Option<DropReason>,
    },
    /// The node's mode changed.
    StateChange { from: NodeMode, to: NodeMode },
    /// An armed deadline fired.
    Timeout { kind: TimeoutKind },
    Crash,
    Recover,
    /// The node assumed leadership.
    Elected { leader: NodeId },
}

pub fn write_trace<'a>(
    path: &Path,
    header: &TraceHeader,
    records: impl IntoIterator<Item = &'a TraceRecord>,
) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", serde_json::to_string(header)?)?;
    for rec in records {
        writeln!(out, "{}", serde_json::to_string(rec)?)?;
    }
    out.flush()
}

/// Reads the header and the raw record lines (left unparsed so replay can
/// compare them byte for byte).
pub fn read_trace(path: &Path) -> std::io::Result<(TraceHeader, Vec<String>)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header_line = lines.next().ok_or_else(|| {
        std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "empty trace file")
    })??;
    let header: TraceHeader = serde_json::from_str(&header_line)?;
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if !line.is_empty() {
            records.push(line);
        }
    }
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::MessageKind;

    #[test]
    fn records_serialize_flat_and_round_trip() {
        let rec = TraceRecord {
            at: 4,
            seq: 17,
            node: NodeId(1),
            round: RoundNumber(0),
            event: TraceEvent::Recv {
                msg: Message {
                    from: NodeId(0),
                    to: NodeId(1),
                    round: RoundNumber(0),
                    kind: MessageKind::Proposal {
                        value: DrawValue::from_micros(900_000).unwrap(),
                    },
                },
                dropped: None,
            },
        };
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(
            json,
            r#"{"at":4,"seq":17,"node":1,"round":0,"event":"recv","detail":{"msg":{"from":0,"to":1,"round":0,"kind":"proposal","value":900000},"dropped":null}}"#
        );
        assert_eq!(serde_json::from_str::<TraceRecord>(&json).unwrap(), rec);
    }

    #[test]
    fn unit_events_need_no_detail() {
        let rec = TraceRecord {
            at: 30,
            seq: 2,
            node: NodeId(4),
            round: RoundNumber(1),
            event: TraceEvent::Crash,
        };
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(json, r#"{"at":30,"seq":2,"node":4,"round":1,"event":"crash"}"#);
        assert_eq!(serde_json::from_str::<TraceRecord>(&json).unwrap(), rec);
    }

    #[test]
    fn elected_and_state_change_round_trip() {
        let rec = TraceRecord {
            at: 6,
            seq: 40,
            node: NodeId(2),
            round: RoundNumber(0),
            event: TraceEvent::StateChange {
                from: NodeMode::Basic,
                to: NodeMode::Leader,
            },
        };
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(
            json,
            r#"{"at":6,"seq":40,"node":2,"round":0,"event":"state_change","detail":{"from":"basic","to":"leader"}}"#
        );
        assert_eq!(serde_json::from_str::<TraceRecord>(&json).unwrap(), rec);
    }
}
