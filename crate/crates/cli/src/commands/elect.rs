use std::path::PathBuf;

use serde::Deserialize;

use spinelect::election::{ElectionConfig, NodeId};
use spinelect::simnet::{
    run, write_trace, DrawPlan, FaultEvent, FaultKind, LatencyModel, SimOutcome, SimSpec, StopRule,
};

use super::{
    describe_config, node_name, parse_latency, parse_node_at, threshold_value, CliError,
    CmdResult, NodeAt, ProtocolFlags,
};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSON run file; explicit flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    proto: ProtocolFlags,
    /// Run seed pinning every draw and every sampled delay.
    #[arg(long)]
    seed: Option<u64>,
    /// Message delay model: fixed:MS or uniform:LO:HI.
    #[arg(long, value_parser = parse_latency)]
    latency: Option<LatencyModel>,
    /// Crash NODE at AT_MS of virtual time (repeatable).
    #[arg(long, value_name = "NODE:AT_MS", value_parser = parse_node_at)]
    crash: Vec<NodeAt>,
    /// Recover NODE at AT_MS of virtual time (repeatable).
    #[arg(long, value_name = "NODE:AT_MS", value_parser = parse_node_at)]
    recover: Vec<NodeAt>,
    /// Hard time budget in virtual ms.
    #[arg(long, value_name = "MS")]
    max_time: Option<u64>,
    /// Write the run's trace to this JSON-lines file.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
}

/// On-disk run description. Every key is optional and falls back to the
/// defaults; unknown keys are rejected. `threshold` is the human form in
/// (0, 1), matching the `--threshold` flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfigFile {
    nodes: Option<u32>,
    threshold: Option<f64>,
    streak_len: Option<u32>,
    draw_period_ms: Option<u64>,
    vote_timeout_ms: Option<u64>,
    leader_ack_timeout_ms: Option<u64>,
    heartbeat_interval_ms: Option<u64>,
    leader_miss_limit: Option<u32>,
    optimized: Option<bool>,
    seed: Option<u64>,
    latency: Option<LatencyModel>,
    faults: Vec<FaultEvent>,
    stop: Option<StopRule>,
    trace: Option<PathBuf>,
}

fn resolve(args: &Args) -> Result<(SimSpec, Option<PathBuf>), CliError> {
    let file: RunConfigFile = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("parsing {}: {e}", path.display())))?
        }
        None => RunConfigFile::default(),
    };

    let mut cfg = ElectionConfig::default();
    if let Some(n) = file.nodes {
        cfg.nodes = n;
    }
    if let Some(t) = file.threshold {
        cfg.threshold = threshold_value(t)?;
    }
    if let Some(r) = file.streak_len {
        cfg.streak_len = r;
    }
    if let Some(ms) = file.draw_period_ms {
        cfg.draw_period_ms = ms;
    }
    if let Some(ms) = file.vote_timeout_ms {
        cfg.vote_timeout_ms = ms;
    }
    if let Some(ms) = file.leader_ack_timeout_ms {
        cfg.leader_ack_timeout_ms = ms;
    }
    if let Some(ms) = file.heartbeat_interval_ms {
        cfg.heartbeat_interval_ms = ms;
    }
    if let Some(n) = file.leader_miss_limit {
        cfg.leader_miss_limit = n;
    }
    if let Some(o) = file.optimized {
        cfg.optimized = o;
    }
    args.proto.apply(&mut cfg)?;
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let latency = args
        .latency
        .clone()
        .or(file.latency)
        .unwrap_or(LatencyModel::UniformRange { lo_ms: 1, hi_ms: 5 });
    latency
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let mut faults = file.faults;
    faults.extend(args.crash.iter().map(|f| FaultEvent {
        at: f.at,
        node: NodeId(f.node),
        kind: FaultKind::Crash,
    }));
    faults.extend(args.recover.iter().map(|f| FaultEvent {
        at: f.at,
        node: NodeId(f.node),
        kind: FaultKind::Recover,
    }));
    faults.sort_by_key(|f| f.at);
    for f in &faults {
        if !cfg.is_member(f.node) {
            return Err(CliError::Usage(format!(
                "fault target node {} is not a member of a {}-node cluster",
                f.node, cfg.nodes,
            )));
        }
    }

    // --max-time caps the budget but keeps the rule's early-stop behavior.
    let stop = match (file.stop, args.max_time) {
        (None, None) => StopRule::default(),
        (Some(rule), None) => rule,
        (None, Some(ms)) => StopRule::StableLeader {
            extra_intervals: 2,
            max_time_ms: ms,
        },
        (Some(StopRule::StableLeader { extra_intervals, .. }), Some(ms)) => {
            StopRule::StableLeader {
                extra_intervals,
                max_time_ms: ms,
            }
        }
        (Some(StopRule::MaxTime { .. }), Some(ms)) => StopRule::MaxTime { max_time_ms: ms },
    };

    let seed = args.seed.or(file.seed).unwrap_or(0);
    let trace = args.trace.clone().or(file.trace);
    Ok((
        SimSpec {
            config: cfg,
            seed,
            latency,
            draw_plan: DrawPlan::Seeded,
            faults,
            stop,
        },
        trace,
    ))
}

pub fn run_cmd(args: Args) -> CmdResult {
    let (spec, trace) = resolve(&args)?;
    println!(
        "{}",
        describe_config(&spec.config, spec.seed, &spec.latency)
    );
    let outcome = run(&spec).map_err(|e| CliError::Runtime(format!("simulation: {e}")))?;
    // Land the trace before touching stdout again: a reader that stops
    // consuming (e.g. `| head`) kills us at the next print, and the
    // artifact must already exist by then.
    if let Some(path) = &trace {
        write_trace(path, &outcome.header, &outcome.records)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
    }
    print_result(&outcome);
    if let Some(path) = trace {
        println!("trace: {} ({} records)", path.display(), outcome.records.len());
    }
    if outcome.stats.elected {
        Ok(())
    } else {
        Err(CliError::Status(1))
    }
}

fn print_result(outcome: &SimOutcome) {
    let s = &outcome.stats;
    let cfg = &outcome.header.spec.config;
    match (s.leader, s.round, s.election_ms) {
        (Some(leader), Some(round), Some(ms)) => {
            println!(
                "elected: node {} ({}) in round {} after {ms} ms",
                leader.0,
                node_name(leader),
                round.0,
            );
            println!(
                "candidates in winning round: {}; candidacies total: {}",
                s.candidates_seen, s.candidacies,
            );
        }
        _ if s.blocked => println!(
            "no leader: blocked with {}/{} nodes up (majority needs {})",
            s.alive_at_stop,
            cfg.nodes,
            cfg.majority(),
        ),
        _ => println!(
            "no leader within {} ms ({}/{} nodes up)",
            s.finished_at, s.alive_at_stop, cfg.nodes,
        ),
    }
    let kinds: Vec<String> = s
        .messages_by_kind
        .iter()
        .filter(|(kind, _)| kind.as_str() != "heartbeat")
        .map(|(kind, n)| format!("{kind} {n}"))
        .collect();
    println!(
        "messages: {} total, {} protocol ({}), {} heartbeat",
        s.messages_total,
        s.non_heartbeat_messages,
        kinds.join(", "),
        s.messages_total - s.non_heartbeat_messages,
    );
    println!(
        "stopped at {} ms with {}/{} nodes up",
        s.finished_at, s.alive_at_stop, cfg.nodes,
    );
}
