use spinelect::randomness::{expected_draws_to_streak, prob_streak_within, streak_probability};

use super::{CliError, CmdResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Launch threshold in (0, 1); the per-draw success chance is 1 minus it.
    #[arg(long)]
    threshold: f64,
    /// Streak length: consecutive winning draws required.
    #[arg(long, value_name = "LEN")]
    streak: u32,
    /// Draw budget for the within-window probability.
    #[arg(long, default_value_t = 100)]
    draws: u64,
}

pub fn run_cmd(args: Args) -> CmdResult {
    if !(args.threshold > 0.0 && args.threshold < 1.0) {
        return Err(CliError::Usage(format!(
            "threshold must be strictly between 0 and 1, got {}",
            args.threshold,
        )));
    }
    if args.streak == 0 {
        return Err(CliError::Usage("streak must be at least 1".to_string()));
    }
    // The window probability is a dynamic program linear in the budget.
    if args.draws > 10_000_000 {
        return Err(CliError::Usage(
            "draw budget above 10000000 is not supported".to_string(),
        ));
    }
    let p = 1.0 - args.threshold;
    println!("per-draw success probability: {p:.6}");
    println!(
        "streak of {} probability: {:.6}",
        args.streak,
        streak_probability(p, args.streak),
    );
    println!(
        "expected draws to launch: {:.6}",
        expected_draws_to_streak(p, args.streak),
    );
    println!(
        "probability of launching within {} draws: {:.6}",
        args.draws,
        prob_streak_within(p, args.streak, args.draws),
    );
    Ok(())
}
