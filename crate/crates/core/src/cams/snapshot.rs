//! Flat, versioned text record of a learner's mutable state, used to resume
//! an interrupted run bit-exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CamsState;
use crate::error::{Error, Result};

pub const SNAPSHOT_SCHEMA: &str = "cams-state/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CamsSnapshot {
    pub schema: String,
    pub round: usize,
    pub cost_spent: usize,
    pub rho: f64,
    pub max_label_mass_seen: f64,
    pub cumulative_policy_losses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_scale: Option<f64>,
    pub rng_seed: String,
    pub rng_stream: u64,
    /// Decimal string: the word position is a u128.
    pub rng_word_pos: String,
}

impl CamsSnapshot {
    pub(crate) fn capture(state: &CamsState) -> Self {
        Self {
            schema: SNAPSHOT_SCHEMA.to_string(),
            round: state.round,
            cost_spent: state.budget.spent(),
            rho: state.rho.rho,
            max_label_mass_seen: state.rho.max_label_mass_seen,
            cumulative_policy_losses: state.cumulative_policy_losses.clone(),
            query_scale: state.budget.scale(),
            rng_seed: hex::encode(state.rng.get_seed()),
            rng_stream: state.rng.get_stream(),
            rng_word_pos: state.rng.get_word_pos().to_string(),
        }
    }

    pub(crate) fn apply(&self, state: &mut CamsState) -> Result<()> {
        if self.schema != SNAPSHOT_SCHEMA {
            return Err(Error::Config(format!(
                "snapshot schema `{}` is not `{SNAPSHOT_SCHEMA}`",
                self.schema
            )));
        }
        if self.cumulative_policy_losses.len() != state.cumulative_policy_losses.len() {
            return Err(Error::DimensionMismatch {
                what: "snapshot policy losses",
                expected: state.cumulative_policy_losses.len(),
                found: self.cumulative_policy_losses.len(),
            });
        }
        if self.cost_spent > state.budget.budget() {
            return Err(Error::Config(format!(
                "snapshot spent {} labels but the budget is {}",
                self.cost_spent,
                state.budget.budget()
            )));
        }
        let seed: [u8; 32] = hex::decode(&self.rng_seed)
            .ok()
            .and_then(|bytes| bytes.try_into().ok())
            .ok_or_else(|| Error::Config("snapshot rng_seed must be 64 hex digits".into()))?;
        let word_pos: u128 = self
            .rng_word_pos
            .parse()
            .map_err(|_| Error::Config("snapshot rng_word_pos is not an integer".into()))?;

        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.rng_stream);
        rng.set_word_pos(word_pos);

        state.round = self.round;
        state.budget.restore_spent(self.cost_spent);
        if let Some(s) = self.query_scale {
            state.budget.set_scale(s);
        }
        state.rho.rho = self.rho;
        state.rho.max_label_mass_seen = self.max_label_mass_seen;
        state.cumulative_policy_losses = self.cumulative_policy_losses.clone();
        state.rng = rng;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed snapshot: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use crate::cams::{CamsConfig, CamsLearner, Regime, Variant};
    use crate::domain::{AdviceMatrix, RoundRecord};
    use crate::learner::Learner;

    fn rec(t: usize) -> RoundRecord {
        RoundRecord {
            round_index: t,
            predictions: vec![t % 3, (t / 2) % 3, 1],
            true_label: (t * 7) % 3,
            advice: AdviceMatrix::from_rows(3, &[vec![0.2, 0.5, 0.3]]).unwrap(),
        }
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let cfg = CamsConfig::new(Regime::Adversarial, Variant::Standard, 60, 25, 42);
        let mut full = CamsLearner::new(cfg.clone(), 3, 3, 1).unwrap();
        let full_out: Vec<_> = (1..=60).map(|t| full.step(&rec(t)).unwrap()).collect();

        let mut first = CamsLearner::new(cfg.clone(), 3, 3, 1).unwrap();
        for t in 1..=23 {
            first.step(&rec(t)).unwrap();
        }
        let text = first.snapshot().to_json();
        assert!(text.starts_with("{\"schema\":\"cams-state/1\""));
        let snap = super::CamsSnapshot::from_json(&text).unwrap();
        let mut resumed = CamsLearner::restore(cfg, 3, 3, 1, &snap).unwrap();
        for t in 24..=60 {
            assert_eq!(resumed.step(&rec(t)).unwrap(), full_out[t - 1]);
        }
        assert_eq!(resumed.snapshot(), full.snapshot());
    }

    #[test]
    fn rejects_wrong_schema() {
        let cfg = CamsConfig::new(Regime::Stochastic, Variant::Standard, 10, 5, 1);
        let learner = CamsLearner::new(cfg.clone(), 3, 3, 1).unwrap();
        let mut snap = learner.snapshot();
        snap.schema = "cams-state/0".into();
        assert!(CamsLearner::restore(cfg, 3, 3, 1, &snap).is_err());
    }
}
