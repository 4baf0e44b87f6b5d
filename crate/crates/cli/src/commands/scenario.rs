use std::path::PathBuf;

use spinelect::election::{DropReason, MessageKind, TimeoutKind};
use spinelect::simnet::{find, registry, run, write_trace, SimOutcome, TraceEvent};

use super::{node_name, out_dir, CliError, CmdResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scenario name; `case1` and `case2` are accepted as short aliases.
    pub name: String,
    /// Write the trace here instead of `<out dir>/<name>.trace.jsonl`.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

fn canonical(name: &str) -> &str {
    match name {
        "case1" => "single_candidate",
        "case2" => "dueling_candidates",
        other => other,
    }
}

pub fn run_cmd(args: Args) -> CmdResult {
    let Some(scenario) = find(canonical(&args.name)) else {
        let names: Vec<&str> = registry().iter().map(|s| s.name()).collect();
        return Err(CliError::Usage(format!(
            "unknown scenario {:?}; available: {} (aliases: case1, case2)",
            args.name,
            names.join(", "),
        )));
    };
    let outcome =
        run(&scenario.spec()).map_err(|e| CliError::Runtime(format!("simulation: {e}")))?;
    // Land the trace before printing the ladder: a reader that stops
    // consuming (e.g. `| head`) kills us at the next print, and the
    // artifact must already exist by then.
    let path = args
        .trace
        .unwrap_or_else(|| out_dir().join(format!("{}.trace.jsonl", scenario.name())));
    write_trace(&path, &outcome.header, &outcome.records)
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;

    println!("scenario {}: {}", scenario.name(), scenario.description());
    for line in ladder(&outcome) {
        println!("{line}");
    }
    let stats = &outcome.stats;
    match (stats.leader, stats.round, stats.election_ms) {
        (Some(leader), Some(round), Some(ms)) => println!(
            "leader: {} in round {} (majority confirmed at {ms} ms)",
            node_name(leader),
            round.0,
        ),
        _ => println!("no leader elected"),
    }
    println!(
        "messages: {} protocol + {} heartbeat",
        stats.non_heartbeat_messages,
        stats.messages_total - stats.non_heartbeat_messages,
    );
    println!("trace: {} ({} records)", path.display(), outcome.records.len());

    match scenario.verify(&outcome) {
        Ok(()) => {
            println!("postconditions: ok");
            Ok(())
        }
        Err(why) => {
            eprintln!("postcondition failed: {why}");
            Err(CliError::Status(1))
        }
    }
}

/// One line per trace record, in delivery order.
fn ladder(outcome: &SimOutcome) -> Vec<String> {
    outcome
        .records
        .iter()
        .map(|r| {
            let what = match &r.event {
                TraceEvent::Draw { value } => format!("draw {value}"),
                TraceEvent::Send { msg } => {
                    format!("send {} -> {}", kind_desc(&msg.kind), node_name(msg.to))
                }
                TraceEvent::Recv { msg, dropped } => {
                    let mut s =
                        format!("recv {} from {}", kind_desc(&msg.kind), node_name(msg.from));
                    if let Some(d) = dropped {
                        s.push_str(&format!(" [ignored: {}]", drop_desc(*d)));
                    }
                    s
                }
                TraceEvent::StateChange { from, to } => format!("{from} -> {to}"),
                TraceEvent::Timeout { kind } => format!("timeout: {}", timeout_desc(*kind)),
                TraceEvent::Crash => "crash".to_string(),
                TraceEvent::Recover => "recover".to_string(),
                TraceEvent::Elected { leader } => {
                    format!("leader is {}", node_name(*leader))
                }
            };
            format!("t={:>5}  r{}  {}  {}", r.at, r.round.0, node_name(r.node), what)
        })
        .collect()
}

fn kind_desc(kind: &MessageKind) -> String {
    match kind {
        MessageKind::Proposal { value } => format!("proposal({value})"),
        MessageKind::PositiveVote { value } => format!("grant({value})"),
        MessageKind::NegativeVote {
            value,
            already_coordinator: false,
        } => format!("refuse({value})"),
        MessageKind::NegativeVote {
            value,
            already_coordinator: true,
        } => format!("refuse({value}, round decided)"),
        MessageKind::Announcement { leader } => format!("announce(leader {})", node_name(*leader)),
        MessageKind::Heartbeat { leader } => format!("heartbeat({})", node_name(*leader)),
    }
}

fn drop_desc(reason: DropReason) -> &'static str {
    match reason {
        DropReason::StaleRound => "stale round",
        DropReason::WrongLeader => "wrong leader",
        DropReason::WrongKind => "unexpected kind",
    }
}

fn timeout_desc(kind: TimeoutKind) -> &'static str {
    match kind {
        TimeoutKind::Vote => "vote collection",
        TimeoutKind::LeaderAck => "leader ack",
        TimeoutKind::LeaderLoss => "leader loss",
    }
}
