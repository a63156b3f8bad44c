//! The interface every model-selection learner exposes to the harness, plus
//! the budget gate they all share.

use rand::Rng;

use crate::domain::{Label, RoundRecord};
use crate::error::Result;

/// What a learner did on one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub chosen_model: usize,
    pub queried: bool,
    /// Bernoulli parameter actually used for the query coin (after any scaling).
    pub query_prob: f64,
    /// 0-1 loss of the chosen model, counted whether or not the label was queried.
    pub learner_loss: u8,
    pub policy_weights_snapshot: Option<Vec<f64>>,
}

pub trait Learner: Send {
    fn name(&self) -> &str;

    /// Processes round `record.round_index`. Rounds must arrive consecutively from 1.
    fn step(&mut self, record: &RoundRecord) -> Result<RoundOutcome>;

    fn cost_spent(&self) -> usize;

    /// Multiplies every subsequent query probability by `scale` (result clipped to `[0, 1]`).
    fn set_query_scale(&mut self, scale: f64);
}

pub(crate) fn loss_of(predictions: &[Label], model: usize, label: Label) -> u8 {
    u8::from(predictions[model] != label)
}

/// Label budget shared by every learner: a query happens only when the coin
/// comes up heads *and* budget remains.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryBudget {
    budget: usize,
    spent: usize,
    scale: Option<f64>,
}

impl QueryBudget {
    pub fn new(budget: usize) -> Self {
        Self {
            budget,
            spent: 0,
            scale: None,
        }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn spent(&self) -> usize {
        self.spent
    }

    pub fn exhausted(&self) -> bool {
        self.spent >= self.budget
    }

    pub(crate) fn restore_spent(&mut self, spent: usize) {
        self.spent = spent;
    }

    pub fn scale(&self) -> Option<f64> {
        self.scale
    }

    pub fn set_scale(&mut self, scale: f64) {
        self.scale = Some(scale.max(0.0));
    }

    /// Query probability after the optional scaling factor.
    pub fn effective(&self, q: f64) -> f64 {
        match self.scale {
            Some(s) => (q * s).clamp(0.0, 1.0),
            None => q.clamp(0.0, 1.0),
        }
    }

    /// Flips the query coin with probability `q` (already effective). Returns
    /// true and charges one label if the coin is heads and budget remains.
    pub fn flip<R: Rng + ?Sized>(&mut self, q: f64, rng: &mut R) -> bool {
        if q <= 0.0 {
            return false;
        }
        let heads = rng.random::<f64>() < q;
        if heads && self.spent < self.budget {
            self.spent += 1;
            true
        } else {
            false
        }
    }
}
