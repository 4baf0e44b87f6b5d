use crate::election::{DrawValue, NodeId};

use super::source::DrawSource;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WheelError {
    #[error("cannot spin an empty wheel")]
    Empty,
    #[error("wheel weights must be positive, entry for {0} is zero")]
    ZeroWeight(NodeId),
}

/// Fitness-proportional selector over `(node, weight)` entries.
///
/// One uniform draw `u` in (0, 1) is scaled to the exact total weight; the
/// winner is the first entry whose cumulative weight strictly exceeds that
/// landing point. All arithmetic is integer micro-units, so landing on a
/// segment boundary (possible, since `u` has six decimals) deterministically
/// picks the next segment, and scaling every weight by a constant cannot
/// change any outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wheel {
    entries: Vec<(NodeId, u64)>,
    total: u64,
}

impl Wheel {
    /// Build from draw values in the order given. Entry order is part of the
    /// selection function, so callers wanting reproducibility must feed a
    /// deterministic order (the coordinator feeds ascending node id).
    pub fn new(entries: impl IntoIterator<Item = (NodeId, DrawValue)>) -> Wheel {
        Wheel::from_weights(
            entries
                .into_iter()
                .map(|(id, v)| (id, v.micros() as u64))
                .collect(),
        )
        .expect("draw values are always positive")
    }

    /// Build from raw positive weights.
    pub fn from_weights(entries: Vec<(NodeId, u64)>) -> Result<Wheel, WheelError> {
        let mut total = 0u64;
        for &(id, w) in &entries {
            if w == 0 {
                return Err(WheelError::ZeroWeight(id));
            }
            total += w;
        }
        Ok(Wheel { entries, total })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Resolve one uniform draw to a winner. Pure: the same `(wheel, u)`
    /// always lands on the same entry.
    ///
    /// The landing point is `u * total`, a rational with denominator
    /// `DrawValue::SCALE`; comparisons multiply through by the denominator to
    /// stay exact: entry `i` wins iff `cum(i) * SCALE > u_micros * total` and
    /// no earlier entry satisfies that.
    pub fn select(&self, u: DrawValue) -> Result<NodeId, WheelError> {
        if self.entries.is_empty() {
            return Err(WheelError::Empty);
        }
        let landing = u.micros() as u128 * self.total as u128;
        let mut cum = 0u128;
        for &(id, w) in &self.entries {
            cum += w as u128;
            if cum * DrawValue::SCALE as u128 > landing {
                return Ok(id);
            }
        }
        // u < 1 guarantees landing < total * SCALE, so the loop always returns.
        unreachable!("landing point beyond total weight")
    }

    /// Spin using the next value from a draw stream.
    pub fn spin(&self, draws: &mut dyn DrawSource) -> Result<NodeId, WheelError> {
        self.select(draws.next_draw())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::source::SeededRng;

    fn v(micros: u32) -> DrawValue {
        DrawValue::from_micros(micros).unwrap()
    }

    fn example_wheel() -> Wheel {
        // A 0.90, B 0.86, C 0.88, D 0.92, E 0.87; total 4.43.
        Wheel::new([
            (NodeId(0), v(900_000)),
            (NodeId(1), v(860_000)),
            (NodeId(2), v(880_000)),
            (NodeId(3), v(920_000)),
            (NodeId(4), v(870_000)),
        ])
    }

    #[test]
    fn worked_example_lands_on_c() {
        // u = 0.5 scales to 2.215 of 4.43; cumulative sums run 0.90, 1.76,
        // 2.64, ... so the first strict exceedance is C.
        let wheel = example_wheel();
        assert_eq!(wheel.total(), 4_430_000);
        assert_eq!(wheel.select(v(500_000)).unwrap(), NodeId(2));
    }

    #[test]
    fn extreme_draws_pick_first_and_last() {
        let wheel = example_wheel();
        assert_eq!(wheel.select(v(1)).unwrap(), NodeId(0));
        assert_eq!(wheel.select(v(999_999)).unwrap(), NodeId(4));
    }

    #[test]
    fn boundary_landing_takes_the_next_segment() {
        // Two equal halves; u = 0.5 lands exactly on the first segment's upper
        // boundary, which is not a strict exceedance, so B wins.
        let wheel = Wheel::new([(NodeId(0), v(500_000)), (NodeId(1), v(500_000))]);
        assert_eq!(wheel.select(v(500_000)).unwrap(), NodeId(1));
        assert_eq!(wheel.select(v(499_999)).unwrap(), NodeId(0));
    }

    #[test]
    fn empty_wheel_is_an_error() {
        let wheel = Wheel::from_weights(vec![]).unwrap();
        assert_eq!(wheel.select(v(1)), Err(WheelError::Empty));
        let mut rng = SeededRng::new(1);
        assert_eq!(wheel.spin(&mut rng), Err(WheelError::Empty));
    }

    #[test]
    fn zero_weight_is_rejected() {
        assert_eq!(
            Wheel::from_weights(vec![(NodeId(0), 1), (NodeId(1), 0)]),
            Err(WheelError::ZeroWeight(NodeId(1)))
        );
    }

    #[test]
    fn singleton_wheel_always_returns_its_entry() {
        let wheel = Wheel::new([(NodeId(3), v(1))]);
        for u in [1, 2, 500_000, 999_999] {
            assert_eq!(wheel.select(v(u)).unwrap(), NodeId(3));
        }
    }

    #[test]
    fn scaling_weights_leaves_every_selection_unchanged() {
        let base = Wheel::from_weights(vec![
            (NodeId(0), 900_000),
            (NodeId(1), 860_000),
            (NodeId(2), 880_000),
            (NodeId(3), 920_000),
            (NodeId(4), 870_000),
        ])
        .unwrap();
        for k in [2u64, 7, 1000] {
            let scaled = Wheel::from_weights(
                vec![
                    (NodeId(0), 900_000 * k),
                    (NodeId(1), 860_000 * k),
                    (NodeId(2), 880_000 * k),
                    (NodeId(3), 920_000 * k),
                    (NodeId(4), 870_000 * k),
                ],
            )
            .unwrap();
            let mut a = SeededRng::new(99);
            let mut b = SeededRng::new(99);
            for _ in 0..10_000 {
                assert_eq!(base.spin(&mut a).unwrap(), scaled.spin(&mut b).unwrap());
            }
        }
    }

    /// Chi-square goodness of fit at significance 0.001: selection frequency
    /// must track the weights. Critical values are the 0.999 quantiles of the
    /// chi-square distribution for k-1 degrees of freedom.
    #[test]
    fn selection_frequency_matches_weights() {
        const SPINS: u64 = 100_000;
        // (weights, 0.999 chi-square quantile for df = len - 1)
        let cases: Vec<(Vec<u64>, f64)> = vec![
            (vec![1, 1], 10.828),
            (vec![10, 1], 10.828),
            (vec![1, 2, 3, 4], 16.266),
            (vec![900_000, 860_000, 880_000, 920_000, 870_000], 18.467),
            (vec![5, 1, 1, 1, 1, 1], 20.515),
        ];
        for (case_idx, (weights, crit)) in cases.iter().enumerate() {
            let wheel = Wheel::from_weights(
                weights
                    .iter()
                    .enumerate()
                    .map(|(i, &w)| (NodeId(i as u32), w))
                    .collect(),
            )
            .unwrap();
            let mut rng = SeededRng::new(derive_seed_for_case(case_idx));
            let mut counts = vec![0u64; weights.len()];
            for _ in 0..SPINS {
                let winner = wheel.spin(&mut rng).unwrap();
                counts[winner.index()] += 1;
            }
            let total_w: u64 = weights.iter().sum();
            let chi2: f64 = weights
                .iter()
                .zip(&counts)
                .map(|(&w, &c)| {
                    let expected = SPINS as f64 * w as f64 / total_w as f64;
                    let diff = c as f64 - expected;
                    diff * diff / expected
                })
                .sum();
            assert!(
                chi2 < *crit,
                "case {case_idx}: chi2 {chi2:.3} exceeds critical value {crit}"
            );
        }
    }

    fn derive_seed_for_case(i: usize) -> u64 {
        crate::randomness::derive_seed(0x5EED, i as u64)
    }
}
