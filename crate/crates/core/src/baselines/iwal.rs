//! Importance-weighted active learning over a finite pool of models.
//!
//! The query probability is the largest 0-1 loss gap between two surviving
//! models over all labels, i.e. 1 exactly when two survivors disagree. After
//! every queried round, models whose importance-weighted error rate exceeds
//! the best survivor's by more than `c0 * sqrt(ln t / t)` are dropped.

use crate::domain::Label;

pub const DEFAULT_C0: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct IwalState {
    pub surviving: Vec<bool>,
    pub weighted_errors: Vec<f64>,
    pub c0: f64,
}

impl IwalState {
    pub fn new(models: usize, c0: f64) -> Self {
        Self {
            surviving: vec![true; models],
            weighted_errors: vec![0.0; models],
            c0,
        }
    }

    pub fn survivors(&self) -> usize {
        self.surviving.iter().filter(|&&s| s).count()
    }

    /// Records the importance-weighted losses of a round queried with probability `p`.
    pub fn observe(&mut self, losses: &[f64], p: f64) {
        for (e, l) in self.weighted_errors.iter_mut().zip(losses) {
            *e += l / p;
        }
    }

    /// Drops every survivor whose error rate (weighted errors / `t`) exceeds the
    /// best survivor's by more than `threshold`. The best survivor always stays.
    pub fn prune(&mut self, t: usize, threshold: f64) {
        let rate = |e: f64| e / t.max(1) as f64;
        let best = self
            .weighted_errors
            .iter()
            .zip(&self.surviving)
            .filter(|(_, &s)| s)
            .map(|(&e, _)| rate(e))
            .fold(f64::INFINITY, f64::min);
        for (alive, &e) in self.surviving.iter_mut().zip(&self.weighted_errors) {
            if *alive && rate(e) - best > threshold {
                *alive = false;
            }
        }
    }
}

/// Rejection threshold `c0 * sqrt(ln t / t)`; `t` is floored at 2 so the first
/// round does not prune on a single observation.
pub fn rejection_threshold(c0: f64, t: usize) -> f64 {
    let t = t.max(2) as f64;
    c0 * (t.ln() / t).sqrt()
}

/// Query probability: `max over surviving pairs (i, j) and labels y of
/// l_i^y - l_j^y`, which under 0-1 loss is 1 iff two survivors disagree.
pub fn iwal_query(state: &IwalState, predictions: &[Label]) -> f64 {
    let mut first: Option<Label> = None;
    for (&p, _) in predictions.iter().zip(&state.surviving).filter(|(_, &s)| s) {
        match first {
            None => first = Some(p),
            Some(f) if f != p => return 1.0,
            Some(_) => {}
        }
    }
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unanimous_survivors_do_not_query() {
        let s = IwalState::new(3, DEFAULT_C0);
        assert_eq!(iwal_query(&s, &[2, 2, 2]), 0.0);
    }

    #[test]
    fn disagreeing_survivors_query() {
        let mut s = IwalState::new(3, DEFAULT_C0);
        assert_eq!(iwal_query(&s, &[2, 1, 2]), 1.0);
        s.surviving[1] = false;
        assert_eq!(iwal_query(&s, &[2, 1, 2]), 0.0);
    }

    #[test]
    fn pruning_arithmetic() {
        let mut s = IwalState::new(3, DEFAULT_C0);
        s.weighted_errors = vec![9.0, 1.0, 2.5];
        // error rates 0.9, 0.1, 0.25 at t = 10
        s.prune(10, 0.2);
        assert_eq!(s.surviving, vec![false, true, true]);
    }

    #[test]
    fn best_model_survives_zero_threshold() {
        let mut s = IwalState::new(3, DEFAULT_C0);
        s.weighted_errors = vec![3.0, 3.0, 4.0];
        s.prune(5, 0.0);
        assert_eq!(s.surviving, vec![true, true, false]);
    }

    #[test]
    fn threshold_schedule() {
        assert!((rejection_threshold(8.0, 100) - 8.0 * (100f64.ln() / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(rejection_threshold(8.0, 1), rejection_threshold(8.0, 2));
    }
}
