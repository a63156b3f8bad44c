//! Contextual recommendation shared by the contextual committee and
//! importance-weighted baselines: the normalized cumulative reward of each
//! model times an exponentially weighted mixture of the base advice rows.

use rand::Rng;

use crate::cams::policy_weights;
use crate::domain::{induced_model_distribution, AdviceMatrix};
use crate::error::Result;
use crate::select;

#[derive(Debug, Clone, PartialEq)]
pub struct ContextualScoreState {
    /// Sum of `1 - loss` per model over queried rounds.
    pub cumulative_rewards: Vec<f64>,
    /// Importance-weighted cumulative losses of the base policies.
    pub policy_losses: Vec<f64>,
}

impl ContextualScoreState {
    pub fn new(models: usize, policies: usize) -> Self {
        Self {
            cumulative_rewards: vec![0.0; models],
            policy_losses: vec![0.0; policies],
        }
    }

    /// Rewards normalized onto the simplex; uniform while they sum to zero.
    pub fn reward_simplex(&self) -> Vec<f64> {
        let total: f64 = self.cumulative_rewards.iter().sum();
        let k = self.cumulative_rewards.len();
        if total > 0.0 {
            self.cumulative_rewards.iter().map(|r| r / total).collect()
        } else {
            vec![1.0 / k as f64; k]
        }
    }

    /// Exponential weights over the base policies at rate `sqrt(ln n / t)`.
    pub fn exp4_weights(&self, t: usize) -> Result<Vec<f64>> {
        let n = self.policy_losses.len();
        let eta = ((n as f64).ln().max(0.0) / t.max(1) as f64).sqrt();
        policy_weights(&self.policy_losses, eta).map(|w| w.weights)
    }

    /// Advice rows mixed by the exp4 weights; uniform when there are no base policies.
    pub fn model_vector(&self, advice: &AdviceMatrix, t: usize) -> Result<Vec<f64>> {
        let k = self.cumulative_rewards.len();
        if advice.n_rows() == 0 {
            return Ok(vec![1.0 / k as f64; k]);
        }
        let weights = self.exp4_weights(t)?;
        induced_model_distribution(&weights, advice).map(|w| w.0)
    }

    /// Folds in one queried round.
    pub fn observe(&mut self, losses: &[f64], advice: &AdviceMatrix, q: f64) {
        for (r, l) in self.cumulative_rewards.iter_mut().zip(losses) {
            *r += 1.0 - l;
        }
        for (total, row) in self.policy_losses.iter_mut().zip(advice.rows()) {
            let expected: f64 = row.iter().zip(losses).map(|(p, l)| p * l).sum();
            *total += expected / q;
        }
    }
}

/// Argmax of `normalize(reward_simplex * model_vector)`; a zero product falls
/// back to a uniformly random model.
pub fn contextual_pick<R: Rng + ?Sized>(rewards: &[f64], model_vector: &[f64], rng: &mut R) -> usize {
    let product: Vec<f64> = rewards.iter().zip(model_vector).map(|(r, v)| r * v).collect();
    let total: f64 = product.iter().sum();
    if total <= 0.0 {
        return rng.random_range(0..rewards.len());
    }
    let normalized: Vec<f64> = product.iter().map(|p| p / total).collect();
    select::argmax(&normalized, rng)
}

pub fn contextual_recommend<R: Rng + ?Sized>(
    state: &ContextualScoreState,
    advice: &AdviceMatrix,
    t: usize,
    rng: &mut R,
) -> Result<usize> {
    let v = state.model_vector(advice, t)?;
    Ok(contextual_pick(&state.reward_simplex(), &v, rng))
}
