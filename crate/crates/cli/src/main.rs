use clap::Parser;

mod commands;

use commands::{analyze, bench, elect, replay, scenario};

/// Deterministic simulator for randomized, draw-streak-triggered leader
/// election with roulette-wheel winner selection.
#[derive(Debug, Parser)]
#[command(name = "spinelect", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Run a scripted case study, print its message ladder, check its
    /// postconditions.
    Scenario(scenario::Args),
    /// Simulate one election; report leader, latency and message counts.
    Elect(elect::Args),
    /// Measure election latency over many seeded runs; write CSV, JSON and a
    /// text histogram.
    Bench(bench::Args),
    /// Print launch-condition probabilities for a threshold and streak
    /// length.
    Analyze(analyze::Args),
    /// Re-run a trace's embedded setup and require byte-identical output.
    Replay(replay::Args),
}

fn main() {
    // Die quietly when the reader of a pipe goes away (`spinelect ... | head`)
    // instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scenario(args) => scenario::run_cmd(args),
        Command::Elect(args) => elect::run_cmd(args),
        Command::Bench(args) => bench::run_cmd(args),
        Command::Analyze(args) => analyze::run_cmd(args),
        Command::Replay(args) => replay::run_cmd(args),
    };
    if let Err(e) = result {
        e.exit();
    }
}
