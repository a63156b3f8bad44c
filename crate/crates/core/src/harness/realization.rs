use serde::{Deserialize, Serialize};

use super::learners::AnyLearner;
use super::metrics::scaling_parameter;
use crate::domain::RoundRecord;
use crate::error::{Error, Result};
use crate::learner::{Learner, RoundOutcome};

/// Per-round record of one learner on one realization.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub chosen_model: Vec<usize>,
    pub queried: Vec<bool>,
    pub query_prob: Vec<f64>,
    pub learner_loss: Vec<u8>,
    pub cumulative_loss: Vec<u64>,
    pub cumulative_queries: Vec<u64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.chosen_model.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen_model.is_empty()
    }

    pub fn push(&mut self, chosen: usize, queried: bool, query_prob: f64, loss: u8) {
        let prev_loss = self.cumulative_loss.last().copied().unwrap_or(0);
        let prev_queries = self.cumulative_queries.last().copied().unwrap_or(0);
        self.chosen_model.push(chosen);
        self.queried.push(queried);
        self.query_prob.push(query_prob);
        self.learner_loss.push(loss);
        self.cumulative_loss.push(prev_loss + u64::from(loss));
        self.cumulative_queries.push(prev_queries + u64::from(queried));
    }

    pub fn record(&mut self, outcome: &RoundOutcome) {
        self.push(outcome.chosen_model, outcome.queried, outcome.query_prob, outcome.learner_loss);
    }

    pub fn final_loss(&self) -> u64 {
        self.cumulative_loss.last().copied().unwrap_or(0)
    }

    pub fn final_queries(&self) -> u64 {
        self.cumulative_queries.last().copied().unwrap_or(0)
    }
}

/// Last round of the early phase: the scale is fixed after round `floor(T/10)`.
pub fn early_phase_end(horizon: usize) -> usize {
    horizon / 10
}

/// Feeds `records[start..end]` to `learner`, appending to `traj`.
///
/// With `scale_early`, the learner's query probabilities are rescaled after
/// the first tenth of the stream so that it spends its remaining budget at
/// the pace it would have needed from the start. If nothing was spent early
/// the scale is left alone.
pub fn run_rounds(
    learner: &mut AnyLearner,
    records: &[RoundRecord],
    range: std::ops::Range<usize>,
    budget: usize,
    scale_early: bool,
    traj: &mut Trajectory,
) -> Result<()> {
    let horizon = records.len();
    let switch = early_phase_end(horizon);
    for idx in range {
        let t = idx + 1;
        if scale_early && t == switch + 1 && horizon >= 10 {
            let spent = learner.cost_spent();
            if spent > 0 {
                learner.set_query_scale(scaling_parameter(budget, spent, horizon)?.max(0.0));
            }
        }
        let outcome = learner.step(&records[idx])?;
        traj.record(&outcome);
        if learner.cost_spent() > budget {
            return Err(Error::Internal(format!(
                "{} spent {} labels with budget {budget}",
                learner.name(),
                learner.cost_spent()
            )));
        }
    }
    Ok(())
}

/// One learner over one full realized stream.
pub fn run_realization(
    learner: &mut AnyLearner,
    records: &[RoundRecord],
    budget: usize,
    scale_early: bool,
) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    run_rounds(learner, records, 0..records.len(), budget, scale_early, &mut traj)?;
    Ok(traj)
}
