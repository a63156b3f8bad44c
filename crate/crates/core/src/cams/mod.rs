//! The contextual active model-selection learner.
//!
//! Each round the learner
//! 1. extends the base advice with one constant policy per model (unless
//!    running the conventional variant) and optionally regularizes every row,
//! 2. turns the cumulative importance-weighted policy losses into
//!    exponential weights at the current learning rate,
//! 3. recommends a model (weighted majority, most probable policy, or a
//!    sampled policy, depending on regime and variant),
//! 4. queries the label with probability `max(1/sqrt(t), H)` where `H` is
//!    the model disagreement under the induced model distribution,
//! 5. on a query within budget, adds `<pi_i, loss / q>` to every policy's
//!    cumulative loss.
//!
//! Rounds on which every model predicts the same label carry no
//! information: the learner still recommends, but sets `q = 0` and skips
//! the update.

mod query;
mod rate;
mod recommend;
mod snapshot;

pub use query::{disagreement, query_floor, query_probability};
pub use rate::{policy_weights, set_rate_adversarial, set_rate_stochastic, RhoTracker};
pub use recommend::{recommend, Regime, Variant};
pub use snapshot::{CamsSnapshot, SNAPSHOT_SCHEMA};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{mp_query_probability, mp_variance, rs_query};
use crate::domain::{extend_advice, induced_model_distribution, regularize_unchecked, AdviceMatrix, RoundRecord};
use crate::error::{Error, Result};
use crate::learner::{loss_of, Learner, QueryBudget, RoundOutcome};
use crate::seed::rng_from_seed;

/// Which criterion turns a round into a query probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QueryRule {
    /// `max(1/sqrt(t), H)`.
    #[default]
    Entropy,
    /// Model Picker's variance rule `max(v, sqrt(ln k / t))`, zero when `v = 0`.
    Variance,
    /// Fixed `B / T`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CamsConfig {
    pub regime: Regime,
    pub variant: Variant,
    /// Stream length `T`; required by the adversarial rate and the random query rule.
    pub horizon: usize,
    pub budget: usize,
    #[serde(default)]
    pub regularize_advice: bool,
    #[serde(default)]
    pub query_rule: QueryRule,
    pub seed: u64,
    #[serde(default)]
    pub record_weights: bool,
    /// Test hook: use this query probability on every round, degenerate ones included.
    #[serde(default)]
    pub fixed_query_prob: Option<f64>,
    /// Test hook: use this learning rate instead of the regime's schedule.
    #[serde(default)]
    pub fixed_rate: Option<f64>,
}

impl CamsConfig {
    pub fn new(regime: Regime, variant: Variant, horizon: usize, budget: usize, seed: u64) -> Self {
        Self {
            regime,
            variant,
            horizon,
            budget,
            regularize_advice: false,
            query_rule: QueryRule::Entropy,
            seed,
            record_weights: false,
            fixed_query_prob: None,
            fixed_rate: None,
        }
    }
}

/// Mutable learner state between rounds.
#[derive(Debug, Clone)]
pub struct CamsState {
    pub cumulative_policy_losses: Vec<f64>,
    pub budget: QueryBudget,
    pub rho: RhoTracker,
    pub round: usize,
    pub rng: ChaCha8Rng,
}

impl CamsState {
    pub fn cost_spent(&self) -> usize {
        self.budget.spent()
    }
}

#[derive(Debug, Clone)]
pub struct CamsLearner {
    name: String,
    config: CamsConfig,
    classes: usize,
    models: usize,
    base_policies: usize,
    state: CamsState,
}

impl CamsLearner {
    pub fn new(config: CamsConfig, classes: usize, models: usize, base_policies: usize) -> Result<Self> {
        if classes < 2 || models < 2 {
            return Err(Error::Config(format!(
                "need at least 2 classes and 2 models (got c = {classes}, k = {models})"
            )));
        }
        if config.horizon == 0 {
            return Err(Error::Config("horizon T must be at least 1".into()));
        }
        let m = match config.variant {
            Variant::Conventional => base_policies,
            _ => base_policies + models,
        };
        if m < 2 {
            return Err(Error::Config(format!(
                "the {:?} variant needs at least 2 policies, got {m}",
                config.variant
            )));
        }
        if let Some(q) = config.fixed_query_prob {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::Config(format!("fixed query probability {q} outside (0, 1]")));
            }
        }
        if let Some(eta) = config.fixed_rate {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::Config(format!("fixed learning rate {eta} must be positive")));
            }
        }
        let state = CamsState {
            cumulative_policy_losses: vec![0.0; m],
            budget: QueryBudget::new(config.budget),
            rho: RhoTracker::default(),
            round: 0,
            rng: rng_from_seed(config.seed),
        };
        Ok(Self {
            name: default_name(config.variant).to_string(),
            config,
            classes,
            models,
            base_policies,
            state,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn config(&self) -> &CamsConfig {
        &self.config
    }

    pub fn state(&self) -> &CamsState {
        &self.state
    }

    /// Size of the policy set the learner weights (`n + k`, or `n` for the conventional variant).
    pub fn policy_count(&self) -> usize {
        self.state.cumulative_policy_losses.len()
    }

    /// Current policy weights, i.e. the ones the next round would start from
    /// when its learning rate equals `eta`.
    pub fn weights_at_rate(&self, eta: f64) -> Result<Vec<f64>> {
        policy_weights(&self.state.cumulative_policy_losses, eta).map(|w| w.weights)
    }

    fn policy_set(&self, base: &AdviceMatrix) -> AdviceMatrix {
        let set = match self.config.variant {
            Variant::Conventional => base.clone(),
            _ => extend_advice(base),
        };
        if self.config.regularize_advice {
            set.map_rows(regularize_unchecked)
        } else {
            set
        }
    }

    fn rate(&self, t: usize, m: usize) -> Result<f64> {
        if let Some(eta) = self.config.fixed_rate {
            return Ok(eta);
        }
        match self.config.regime {
            Regime::Stochastic => set_rate_stochastic(t, m),
            Regime::Adversarial => {
                set_rate_adversarial(t, self.config.horizon, m, self.state.rho.rho, self.classes)
            }
        }
    }

    fn raw_query_probability(&self, record: &RoundRecord, w: &[f64], t: usize) -> f64 {
        match self.config.query_rule {
            QueryRule::Entropy => query_probability(disagreement(&record.predictions, w, self.classes), t),
            QueryRule::Variance => {
                mp_query_probability(mp_variance(&record.predictions, w, self.classes), t, self.models)
            }
            QueryRule::Random => rs_query(self.config.budget, self.config.horizon),
        }
    }

    pub fn snapshot(&self) -> CamsSnapshot {
        CamsSnapshot::capture(&self.state)
    }

    /// Rebuilds a learner mid-stream from a snapshot taken with the same configuration.
    pub fn restore(
        config: CamsConfig,
        classes: usize,
        models: usize,
        base_policies: usize,
        snapshot: &CamsSnapshot,
    ) -> Result<Self> {
        let mut learner = Self::new(config, classes, models, base_policies)?;
        snapshot.apply(&mut learner.state)?;
        Ok(learner)
    }
}

fn default_name(variant: Variant) -> &'static str {
    match variant {
        Variant::Standard => "cams",
        Variant::Max => "cams-max",
        Variant::RandomPolicy => "cams-random-policy",
        Variant::Conventional => "cams-conventional",
    }
}

impl Learner for CamsLearner {
    fn name(&self) -> &str {
        &self.name
    }

    fn step(&mut self, record: &RoundRecord) -> Result<RoundOutcome> {
        record.validate(self.classes, self.models, self.base_policies)?;
        let t = self.state.round + 1;
        if record.round_index != t {
            return Err(Error::RoundOutOfOrder {
                expected: t,
                found: record.round_index,
            });
        }

        let policies = self.policy_set(&record.advice);
        let m = policies.n_rows();
        let eta = self.rate(t, m)?;
        let weights = policy_weights(&self.state.cumulative_policy_losses, eta)?.weights;
        let w = induced_model_distribution(&weights, &policies)?;

        let chosen = recommend(
            self.config.regime,
            self.config.variant,
            &weights,
            &policies,
            &mut self.state.rng,
        )?;

        let degenerate = record.is_unanimous();
        let raw_q = match self.config.fixed_query_prob {
            Some(q) => q,
            None if degenerate => 0.0,
            None => self.raw_query_probability(record, &w.0, t),
        };
        let q = self.state.budget.effective(raw_q);
        let queried = self.state.budget.flip(q, &mut self.state.rng);
        if queried {
            let losses = record.losses();
            for (total, row) in self.state.cumulative_policy_losses.iter_mut().zip(policies.rows()) {
                let expected: f64 = row.iter().zip(&losses).map(|(p, l)| p * l).sum();
                *total += expected / q;
            }
        }

        // rho feeds the next round's rate only
        if !degenerate {
            self.state.rho.update(&w.0, &record.predictions, self.classes);
        }
        self.state.round = t;

        Ok(RoundOutcome {
            chosen_model: chosen,
            queried,
            query_prob: q,
            learner_loss: loss_of(&record.predictions, chosen, record.true_label),
            policy_weights_snapshot: self.config.record_weights.then_some(weights),
        })
    }

    fn cost_spent(&self) -> usize {
        self.state.budget.spent()
    }

    fn set_query_scale(&mut self, scale: f64) {
        self.state.budget.set_scale(scale);
    }
}

/// Importance-weighted contribution of one round to a model's loss estimate:
/// flips a `Bernoulli(q)` coin and returns `loss / q` on heads, 0 otherwise.
pub fn estimate_loss<R: Rng + ?Sized>(loss: f64, q: f64, rng: &mut R) -> f64 {
    if rng.random::<f64>() < q {
        loss / q
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::AdviceMatrix;
    use crate::seed::rng_from_seed;

    fn record(t: usize, predictions: Vec<usize>, label: usize, advice: &[Vec<f64>], k: usize) -> RoundRecord {
        RoundRecord {
            round_index: t,
            predictions,
            true_label: label,
            advice: AdviceMatrix::from_rows(k, advice).unwrap(),
        }
    }

    #[test]
    fn zero_budget_never_updates() {
        let cfg = CamsConfig::new(Regime::Stochastic, Variant::Standard, 200, 0, 9);
        let mut learner = CamsLearner::new(cfg, 2, 2, 1).unwrap();
        for t in 1..=200 {
            let out = learner.step(&record(t, vec![0, 1], t % 2, &[vec![0.5, 0.5]], 2)).unwrap();
            assert!(!out.queried);
        }
        assert!(learner.state().cumulative_policy_losses.iter().all(|&l| l == 0.0));
        let w = learner.weights_at_rate(1.0).unwrap();
        assert!(w.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn perfect_policy_never_errs() {
        let cfg = CamsConfig::new(Regime::Stochastic, Variant::Conventional, 100, 100, 1);
        let mut learner = CamsLearner::new(cfg, 2, 2, 2).unwrap();
        for t in 1..=100 {
            let label = t % 2;
            let preds = vec![label, 1 - label];
            let out = learner
                .step(&record(t, preds, label, &[vec![1.0, 0.0], vec![1.0, 0.0]], 2))
                .unwrap();
            assert_eq!(out.chosen_model, 0);
            assert_eq!(out.learner_loss, 0);
        }
    }

    #[test]
    fn first_round_queries_with_probability_one() {
        let cfg = CamsConfig::new(Regime::Stochastic, Variant::Standard, 10, 10, 5);
        let mut learner = CamsLearner::new(cfg, 3, 2, 0).unwrap();
        let out = learner.step(&record(1, vec![0, 1], 2, &[], 2)).unwrap();
        assert_eq!(out.query_prob, 1.0);
        assert!(out.queried);
        assert_eq!(learner.cost_spent(), 1);
    }

    #[test]
    fn unanimous_round_skips_query_and_update() {
        let cfg = CamsConfig::new(Regime::Stochastic, Variant::Standard, 10, 10, 5);
        let mut learner = CamsLearner::new(cfg, 3, 2, 0).unwrap();
        let out = learner.step(&record(1, vec![1, 1], 2, &[], 2)).unwrap();
        assert_eq!(out.query_prob, 0.0);
        assert!(!out.queried);
        assert_eq!(out.learner_loss, 1);
        assert_eq!(learner.state().rho.rho, 1.0);
    }

    #[test]
    fn rejects_out_of_order_rounds_and_bad_dims() {
        let cfg = CamsConfig::new(Regime::Stochastic, Variant::Standard, 10, 10, 5);
        let mut learner = CamsLearner::new(cfg, 2, 2, 0).unwrap();
        assert!(matches!(
            learner.step(&record(2, vec![0, 1], 0, &[], 2)),
            Err(Error::RoundOutOfOrder { expected: 1, found: 2 })
        ));
        assert!(learner.step(&record(1, vec![0, 1], 0, &[vec![1.0, 0.0]], 2)).is_err());
    }

    #[test]
    fn conventional_needs_two_policies() {
        let cfg = CamsConfig::new(Regime::Stochastic, Variant::Conventional, 10, 10, 5);
        assert!(CamsLearner::new(cfg, 2, 3, 1).is_err());
    }

    #[test]
    fn importance_weighting_is_unbiased_through_step() {
        // two models, model 0 always wrong; q fixed at 0.5 through the test hook
        let mut cfg = CamsConfig::new(Regime::Stochastic, Variant::Standard, 100_000, 100_000, 77);
        cfg.fixed_query_prob = Some(0.5);
        let mut learner = CamsLearner::new(cfg, 2, 2, 0).unwrap();
        let n = 100_000;
        for t in 1..=n {
            learner.step(&record(t, vec![1, 0], 0, &[], 2)).unwrap();
        }
        // constant policy 0 (index n + 0 = 0) accumulates the estimates of model 0's loss
        let mean = learner.state().cumulative_policy_losses[0] / n as f64;
        assert!((mean - 1.0).abs() <= 0.01, "{mean}");
        assert_eq!(learner.state().cumulative_policy_losses[1], 0.0);
    }

    #[test]
    fn estimate_loss_mean() {
        let mut rng = rng_from_seed(4);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| estimate_loss(1.0, 0.25, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 4.0 * (3.0f64 / n as f64).sqrt(), "{mean}");
    }
}
