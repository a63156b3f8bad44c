use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{induced_model_distribution, AdviceMatrix};
use crate::error::Result;
use crate::select;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Stochastic,
    Adversarial,
}

/// Recommendation variants. In the adversarial regime all of them sample a
/// policy and then a model from its row; they differ only in the stochastic regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Argmax of the policy-weighted model distribution.
    Standard,
    /// Argmax row of the most probable policy.
    Max,
    /// Argmax row of a policy sampled from the weights.
    RandomPolicy,
    /// Standard rule over the base policies only (no constant policies).
    Conventional,
}

pub fn recommend<R: Rng + ?Sized>(
    regime: Regime,
    variant: Variant,
    weights: &[f64],
    advice: &AdviceMatrix,
    rng: &mut R,
) -> Result<usize> {
    Ok(match (regime, variant) {
        (Regime::Adversarial, _) => {
            let policy = select::sample(weights, rng);
            select::sample(advice.row(policy), rng)
        }
        (Regime::Stochastic, Variant::Standard | Variant::Conventional) => {
            let w = induced_model_distribution(weights, advice)?;
            select::argmax(&w.0, rng)
        }
        (Regime::Stochastic, Variant::Max) => {
            let policy = select::argmax(weights, rng);
            select::argmax(advice.row(policy), rng)
        }
        (Regime::Stochastic, Variant::RandomPolicy) => {
            let policy = select::sample(weights, rng);
            select::argmax(advice.row(policy), rng)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rand_core::impls;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Every draw is the lowest possible value, i.e. quantile 0.
    struct ZeroRng;

    impl RngCore for ZeroRng {
        fn next_u32(&mut self) -> u32 {
            0
        }
        fn next_u64(&mut self) -> u64 {
            0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            impls::fill_bytes_via_next(self, dst)
        }
    }

    fn matrix(cols: usize, rows: &[Vec<f64>]) -> AdviceMatrix {
        AdviceMatrix::from_rows(cols, rows).unwrap()
    }

    #[test]
    fn stochastic_degenerate_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let advice = matrix(3, &[vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]);
        let j = recommend(Regime::Stochastic, Variant::Standard, &[1.0, 0.0], &advice, &mut rng).unwrap();
        assert_eq!(j, 2);
    }

    #[test]
    fn stochastic_uses_convex_combination() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let advice = matrix(2, &[vec![0.6, 0.4], vec![0.2, 0.8]]);
        let j = recommend(Regime::Stochastic, Variant::Standard, &[0.5, 0.5], &advice, &mut rng).unwrap();
        assert_eq!(j, 1);
        // the most probable policy alone would pick model 0
        let j = recommend(Regime::Stochastic, Variant::Max, &[0.6, 0.4], &advice, &mut rng).unwrap();
        assert_eq!(j, 0);
    }

    #[test]
    fn adversarial_quantile_zero_picks_first_positive_entries() {
        let advice = matrix(3, &[vec![0.0, 0.3, 0.7], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let j = recommend(Regime::Adversarial, Variant::Standard, &[0.6, 0.3, 0.1], &advice, &mut ZeroRng).unwrap();
        assert_eq!(j, 1);
        let j = recommend(Regime::Adversarial, Variant::Max, &[0.0, 0.3, 0.7], &advice, &mut ZeroRng).unwrap();
        assert_eq!(j, 0);
    }

    #[test]
    fn random_policy_samples_policy_then_argmax() {
        let advice = matrix(2, &[vec![0.9, 0.1], vec![0.2, 0.8]]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ones = 0;
        for _ in 0..4000 {
            ones += recommend(Regime::Stochastic, Variant::RandomPolicy, &[0.25, 0.75], &advice, &mut rng).unwrap();
        }
        let frac = ones as f64 / 4000.0;
        assert!((frac - 0.75).abs() < 0.03, "{frac}");
    }
}
