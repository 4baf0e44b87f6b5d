use std::path::PathBuf;

use spinelect::election::ElectionConfig;
use spinelect::experiments::{election_benchmark, emit_csv, emit_histogram};
use spinelect::simnet::LatencyModel;

use super::{describe_config, out_dir, parse_latency, CliError, CmdResult, ProtocolFlags};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Simulated elections to run; 500+ gives stable statistics.
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    /// Campaign seed; iteration i derives its own sub-seed from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    proto: ProtocolFlags,
    /// Message delay model: fixed:MS or uniform:LO:HI.
    #[arg(long, value_parser = parse_latency)]
    latency: Option<LatencyModel>,
    /// Directory for campaign.csv, campaign.json and histogram.txt.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

pub fn run_cmd(args: Args) -> CmdResult {
    if args.iterations == 0 {
        return Err(CliError::Usage("iterations must be at least 1".to_string()));
    }
    let mut cfg = ElectionConfig::default();
    args.proto.apply(&mut cfg)?;
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let latency = args
        .latency
        .clone()
        .unwrap_or(LatencyModel::UniformRange { lo_ms: 1, hi_ms: 5 });
    latency
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    println!(
        "{} iterations, {}",
        args.iterations,
        describe_config(&cfg, args.seed, &latency)
    );
    let summary = election_benchmark(&cfg, &latency, args.iterations, args.seed)
        .map_err(|e| CliError::Runtime(format!("benchmark: {e}")))?;

    // Land the artifacts before the summary prints: a reader that stops
    // consuming (e.g. `| head`) kills us at the next print, and the files
    // must already exist by then.
    let dir = args.out.unwrap_or_else(out_dir);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
    let runtime = |e: spinelect::experiments::EmitError| CliError::Runtime(e.to_string());
    emit_csv(&summary, &dir.join("campaign.csv")).map_err(runtime)?;
    emit_histogram(&summary, &dir.join("histogram.txt")).map_err(runtime)?;
    let json_path = dir.join("campaign.json");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&json_path, json + "\n")
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", json_path.display())))?;

    println!("completed {}, failed {}", summary.completed, summary.failed);
    println!(
        "mean {:.2} ms  min {} ms  p90 {} ms  max {} ms",
        summary.mean_ms, summary.min_ms, summary.p90_ms, summary.max_ms,
    );
    println!(
        "split votes: {:.2}% of completed runs",
        summary.split_vote_fraction * 100.0
    );
    println!(
        "wrote campaign.csv, campaign.json, histogram.txt in {}",
        dir.display()
    );
    Ok(())
}
