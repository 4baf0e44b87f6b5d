//! Closed-form and dynamic-programming answers for streak launch behavior,
//! used to sanity-check what the simulator measures.
//!
//! With per-draw success probability `p` (a draw strictly above the
//! threshold) and required streak length `r`:
//!
//! * the chance that `r` specific consecutive draws all succeed is `p^r`;
//! * the expected number of draws until the first `r`-streak completes is
//!   `sum_{i=1..=r} p^-i`, from the recurrence `E_i = (E_{i-1} + 1) / p`;
//! * the chance that some `r`-streak completes within the first `n` draws
//!   comes from a DP over the current streak length, `O(n * r)` time.

/// Probability that `r` consecutive draws all land above the threshold.
///
/// `p` must be in (0, 1) and `r >= 1`.
pub fn streak_probability(p: f64, r: u32) -> f64 {
    check_args(p, r);
    (0..r).fold(1.0, |acc, _| acc * p)
}

/// Expected draws until the first streak of `r` successes completes.
///
/// `p` must be in (0, 1) and `r >= 1`.
pub fn expected_draws_to_streak(p: f64, r: u32) -> f64 {
    check_args(p, r);
    let inv = 1.0 / p;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..r {
        term *= inv;
        sum += term;
    }
    sum
}

/// Probability that a streak of `r` successes completes within the first `n`
/// draws. `n = 0` is 0; as `n` grows the value is non-decreasing with limit 1.
///
/// `p` must be in (0, 1) and `r >= 1`.
pub fn prob_streak_within(p: f64, r: u32, n: u64) -> f64 {
    check_args(p, r);
    let r = r as usize;
    // state[s] = probability the current run of successes has length s and no
    // r-streak has completed yet; `done` absorbs completions.
    let mut state = vec![0.0f64; r];
    state[0] = 1.0;
    let mut done = 0.0f64;
    for _ in 0..n {
        let mut next = vec![0.0f64; r];
        for s in 0..r {
            let succeed = state[s] * p;
            if s + 1 == r {
                done += succeed;
            } else {
                next[s + 1] += succeed;
            }
            next[0] += state[s] * (1.0 - p);
        }
        state = next;
    }
    done
}

fn check_args(p: f64, r: u32) {
    assert!(p > 0.0 && p < 1.0, "success probability must be in (0, 1)");
    assert!(r >= 1, "streak length must be at least 1");
}
