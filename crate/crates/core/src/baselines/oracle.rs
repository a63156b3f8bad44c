//! The hindsight-best single base policy, replayed with the CAMS query rule.

use rand_chacha::ChaCha8Rng;

use crate::cams::{disagreement, query_probability};
use crate::domain::{extend_advice, AdviceMatrix, RoundRecord};
use crate::error::{Error, Result};
use crate::learner::{loss_of, Learner, QueryBudget, RoundOutcome};
use crate::select;
use crate::seed::rng_from_seed;

/// Loss of following a policy greedily: the mean 0-1 loss of the models tied
/// for the top of its row (one model in the absence of ties).
pub fn greedy_follow_loss(row: &[f64], losses: &[f64]) -> f64 {
    let top = select::argmax_set(row);
    top.iter().map(|&j| losses[j]).sum::<f64>() / top.len() as f64
}

/// Rows the oracle chooses among: the base policies, or the constant
/// policies when there are none.
fn candidate_rows(advice: &AdviceMatrix) -> AdviceMatrix {
    if advice.n_rows() == 0 {
        extend_advice(advice)
    } else {
        advice.clone()
    }
}

/// Cumulative greedy-follow loss of every candidate policy over the full stream.
pub fn policy_follow_losses(records: &[RoundRecord]) -> Vec<f64> {
    let mut totals: Vec<f64> = Vec::new();
    for rec in records {
        let rows = candidate_rows(&rec.advice);
        let losses = rec.losses();
        if totals.is_empty() {
            totals = vec![0.0; rows.n_rows()];
        }
        for (total, row) in totals.iter_mut().zip(rows.rows()) {
            *total += greedy_follow_loss(row, &losses);
        }
    }
    totals
}

/// Index of the hindsight-best candidate policy (lowest index on ties).
pub fn oracle_policy(records: &[RoundRecord]) -> Result<usize> {
    let totals = policy_follow_losses(records);
    totals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Config("oracle needs a non-empty stream".into()))
}

#[derive(Debug, Clone)]
pub struct OracleLearner {
    policy: usize,
    classes: usize,
    budget: QueryBudget,
    round: usize,
    rng: ChaCha8Rng,
}

impl OracleLearner {
    /// Picks the policy in hindsight from `records`, which must be the stream it will replay.
    pub fn new(records: &[RoundRecord], classes: usize, budget: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            policy: oracle_policy(records)?,
            classes,
            budget: QueryBudget::new(budget),
            round: 0,
            rng: rng_from_seed(seed),
        })
    }

    pub fn policy(&self) -> usize {
        self.policy
    }
}

impl Learner for OracleLearner {
    fn name(&self) -> &str {
        "oracle"
    }

    fn step(&mut self, record: &RoundRecord) -> Result<RoundOutcome> {
        let t = self.round + 1;
        if record.round_index != t {
            return Err(Error::RoundOutOfOrder {
                expected: t,
                found: record.round_index,
            });
        }
        let rows = candidate_rows(&record.advice);
        let row = rows.row(self.policy);
        let chosen = select::argmax(row, &mut self.rng);
        let raw_q = if record.is_unanimous() {
            0.0
        } else {
            query_probability(disagreement(&record.predictions, row, self.classes), t)
        };
        let q = self.budget.effective(raw_q);
        let queried = self.budget.flip(q, &mut self.rng);
        self.round = t;
        Ok(RoundOutcome {
            chosen_model: chosen,
            queried,
            query_prob: q,
            learner_loss: loss_of(&record.predictions, chosen, record.true_label),
            policy_weights_snapshot: None,
        })
    }

    fn cost_spent(&self) -> usize {
        self.budget.spent()
    }

    fn set_query_scale(&mut self, scale: f64) {
        self.budget.set_scale(scale);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: usize, preds: Vec<usize>, label: usize, rows: &[Vec<f64>]) -> RoundRecord {
        RoundRecord {
            round_index: t,
            predictions: preds,
            true_label: label,
            advice: AdviceMatrix::from_rows(2, rows).unwrap(),
        }
    }

    #[test]
    fn follows_dominating_policy() {
        // policy 0 always points at the correct model, policy 1 at the wrong one
        let records: Vec<_> = (1..=50)
            .map(|t| {
                let good = t % 2;
                let mut row0 = vec![0.1, 0.1];
                row0[good] = 0.9;
                let mut preds = vec![1, 1];
                preds[good] = 0;
                rec(t, preds, 0, &[row0.clone(), vec![row0[1], row0[0]]])
            })
            .collect();
        let mut oracle = OracleLearner::new(&records, 2, 50, 3).unwrap();
        assert_eq!(oracle.policy(), 0);
        for r in &records {
            assert_eq!(oracle.step(r).unwrap().learner_loss, 0);
        }
    }

    #[test]
    fn picks_lower_cumulative_loss() {
        // policy 0 always chooses model 0, policy 1 model 1; model 0 wrong 10 times, model 1 12 times
        let records: Vec<_> = (1..=30)
            .map(|t| {
                let m0_wrong = t <= 10;
                let m1_wrong = t > 18;
                let preds = vec![usize::from(m0_wrong), usize::from(m1_wrong)];
                rec(t, preds, 0, &[vec![0.8, 0.2], vec![0.3, 0.7]])
            })
            .collect();
        assert_eq!(policy_follow_losses(&records), vec![10.0, 12.0]);
        assert_eq!(oracle_policy(&records).unwrap(), 0);
    }

    #[test]
    fn without_base_policies_uses_best_model() {
        let records: Vec<_> = (1..=10)
            .map(|t| RoundRecord {
                round_index: t,
                predictions: vec![1, 0],
                true_label: 0,
                advice: AdviceMatrix::empty(2),
            })
            .collect();
        assert_eq!(oracle_policy(&records).unwrap(), 1);
    }
}
