use rayon::prelude::*;

use crate::election::{DrawValue, ElectionConfig};
use crate::randomness::{derive_seed, DrawSource, SeededRng};
use crate::simnet::{run, DrawPlan, LatencyModel, SimError, SimSpec, StopRule};

use super::summary::CampaignSummary;

/// Raw launch-condition samples: for each iteration, the number of draws one
/// node needs until `streak_len` consecutive draws land strictly above
/// `threshold`. Iteration `i` runs on `derive_seed(seed, i)`, so any prefix
/// of a larger campaign is reproducible on its own.
pub fn launch_draw_samples(
    threshold: DrawValue,
    streak_len: u32,
    iterations: usize,
    seed: u64,
) -> Vec<u64> {
    assert!(iterations >= 1, "a campaign needs at least one iteration");
    assert!(streak_len >= 1, "streak length must be at least 1");
    assert!(
        threshold.micros() < DrawValue::MAX_MICROS,
        "threshold leaves no winning draws"
    );
    (0..iterations as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::new(derive_seed(seed, i));
            let mut streak = 0;
            let mut draws = 0u64;
            loop {
                draws += 1;
                if rng.next_draw() > threshold {
                    streak += 1;
                    if streak == streak_len {
                        return draws;
                    }
                } else {
                    streak = 0;
                }
            }
        })
        .collect()
}

/// Monte Carlo distribution of the time one node takes to satisfy the launch
/// condition, drawing every `draw_period_ms`.
///
/// Statistically meaningful from a few hundred iterations up; the summary's
/// mean converges on [`expected_draws_to_streak`] x `draw_period_ms` and its
/// within-100 ms fraction on [`prob_streak_within`] over the 100 ms draw
/// budget.
///
/// [`expected_draws_to_streak`]: crate::randomness::expected_draws_to_streak
/// [`prob_streak_within`]: crate::randomness::prob_streak_within
pub fn launch_time_campaign(
    threshold: DrawValue,
    streak_len: u32,
    draw_period_ms: u64,
    iterations: usize,
    seed: u64,
) -> CampaignSummary {
    assert!(draw_period_ms >= 1, "draws need a positive period");
    let times: Vec<u64> = launch_draw_samples(threshold, streak_len, iterations, seed)
        .into_iter()
        .map(|draws| draws * draw_period_ms)
        .collect();
    CampaignSummary::from_times(iterations, 0, times, 0)
}

/// Election-latency distribution over full simulated runs.
///
/// Iteration `i` simulates a fresh fault-free cluster under `config` and
/// `latency` with run seed `derive_seed(seed, i)`, stopping once a leader has
/// been stable for two heartbeat intervals. Runs that fail to elect inside
/// the stop rule's time budget count as `failed` and stay out of the latency
/// statistics; a completed run contributes its election time and whether its
/// winning round had competing candidates (a split vote).
pub fn election_benchmark(
    config: &ElectionConfig,
    latency: &LatencyModel,
    iterations: usize,
    seed: u64,
) -> Result<CampaignSummary, SimError> {
    assert!(iterations >= 1, "a campaign needs at least one iteration");
    config.validate()?;
    latency.validate()?;
    let stats = (0..iterations as u64)
        .into_par_iter()
        .map(|i| {
            let spec = SimSpec {
                config: config.clone(),
                seed: derive_seed(seed, i),
                latency: latency.clone(),
                draw_plan: DrawPlan::Seeded,
                faults: Vec::new(),
                stop: StopRule::default(),
            };
            run(&spec).map(|outcome| outcome.stats)
        })
        .collect::<Result<Vec<_>, SimError>>()?;

    let mut times = Vec::with_capacity(stats.len());
    let mut split_votes = 0;
    for s in &stats {
        let Some(ms) = s.election_ms else { continue };
        times.push(ms);
        if s.candidates_seen >= 2 {
            split_votes += 1;
        }
    }
    let failed = iterations - times.len();
    Ok(CampaignSummary::from_times(
        iterations,
        failed,
        times,
        split_votes,
    ))
}
