//! Learning-rate schedules, the skewness tracker feeding the adversarial
//! rate, and the exponential-weights map from cumulative losses to policy weights.

use crate::domain::{label_masses, Label, PolicyWeights};
use crate::error::{Error, Result};

/// `sqrt(ln m / t)`.
pub fn set_rate_stochastic(t: usize, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Config(format!(
            "policy set of size {m} is too small for exponential weighting (need at least 2)"
        )));
    }
    if t == 0 {
        return Err(Error::Config("round index must start at 1".into()));
    }
    Ok(((m as f64).ln() / t as f64).sqrt())
}

/// `sqrt(1/sqrt(t) + rho / (c^2 ln c)) * sqrt(ln m / T)`.
pub fn set_rate_adversarial(t: usize, horizon: usize, m: usize, rho: f64, classes: usize) -> Result<f64> {
    if classes < 2 {
        return Err(Error::Config(format!("c = {classes} (need at least 2 classes)")));
    }
    if m < 2 {
        return Err(Error::Config(format!(
            "policy set of size {m} is too small for exponential weighting (need at least 2)"
        )));
    }
    if t == 0 || t > horizon {
        return Err(Error::Config(format!(
            "round {t} outside the declared horizon 1..={horizon}"
        )));
    }
    let c = classes as f64;
    let inner = 1.0 / (t as f64).sqrt() + rho / (c * c * c.ln());
    Ok(inner.sqrt() * ((m as f64).ln() / horizon as f64).sqrt())
}

/// Running skewness tracker: `rho = 1 - max over past rounds and labels of the label mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoTracker {
    pub max_label_mass_seen: f64,
    pub rho: f64,
}

impl Default for RhoTracker {
    fn default() -> Self {
        Self {
            max_label_mass_seen: 0.0,
            rho: 1.0,
        }
    }
}

impl RhoTracker {
    /// Folds one round into the tracker and returns the new `rho`.
    pub fn update(&mut self, w: &[f64], predictions: &[Label], classes: usize) -> f64 {
        let top = label_masses(w, predictions, classes)
            .into_iter()
            .fold(0.0, f64::max)
            .min(1.0);
        self.max_label_mass_seen = self.max_label_mass_seen.max(top);
        self.rho = (1.0 - self.max_label_mass_seen).clamp(0.0, 1.0);
        self.rho
    }
}

/// `q_i proportional to exp(-eta * L_i)`, shifted by the minimum loss before exponentiating.
pub fn policy_weights(cumulative_losses: &[f64], eta: f64) -> Result<PolicyWeights> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::Internal(format!("learning rate {eta} is not a finite non-negative number")));
    }
    if cumulative_losses.is_empty() {
        return Err(Error::Internal("empty policy set".into()));
    }
    if let Some(bad) = cumulative_losses.iter().find(|l| !l.is_finite()) {
        return Err(Error::Internal(format!("non-finite cumulative policy loss {bad}")));
    }
    let min = cumulative_losses.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = cumulative_losses
        .iter()
        .map(|l| (-eta * (l - min)).exp())
        .collect();
    let z: f64 = raw.iter().sum();
    Ok(PolicyWeights {
        weights: raw.into_iter().map(|r| r / z).collect(),
        cumulative_losses: cumulative_losses.to_vec(),
    })
}
