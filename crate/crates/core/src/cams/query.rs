//! Model-disagreement query criterion.

use crate::domain::{label_masses, snap_unit, Label};

/// Entropy-like disagreement of the models' predictions under `w`:
/// `(1/c) * sum over labels y with expected loss l_y in (0,1) of l_y * log_c(1/l_y)`,
/// where `l_y = 1 - mass(w on models predicting y)`.
///
/// Always lies in `[0, 1/(e ln c)]`.
pub fn disagreement(predictions: &[Label], w: &[f64], classes: usize) -> f64 {
    let ln_c = (classes as f64).ln();
    let total: f64 = label_masses(w, predictions, classes)
        .into_iter()
        .map(|mass| snap_unit(1.0 - mass))
        .filter(|&l| l > 0.0 && l < 1.0)
        .map(|l| l * (1.0 / l).ln() / ln_c)
        .sum();
    total / classes as f64
}

/// Lower bound `1/sqrt(t)` on the query probability at round `t`.
pub fn query_floor(t: usize) -> f64 {
    1.0 / (t as f64).sqrt()
}

/// `max(1/sqrt(t), H)`.
pub fn query_probability(disagreement: f64, t: usize) -> f64 {
    query_floor(t).max(disagreement).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unanimous_predictions_have_no_disagreement() {
        assert_eq!(disagreement(&[1, 1, 1], &[0.2, 0.3, 0.5], 3), 0.0);
        assert_eq!(disagreement(&[0, 0], &[1.0, 0.0], 2), 0.0);
    }

    #[test]
    fn binary_even_split() {
        let h = disagreement(&[0, 1], &[0.5, 0.5], 2);
        assert!((h - 0.5).abs() < 1e-12, "{h}");
    }

    #[test]
    fn degenerate_masses_are_excluded() {
        assert_eq!(disagreement(&[0, 1], &[1.0, 0.0], 3), 0.0);
    }

    #[test]
    fn near_degenerate_masses_snap() {
        let h = disagreement(&[0, 1], &[1.0 - 1e-14, 1e-14], 2);
        assert_eq!(h, 0.0);
    }

    #[test]
    fn query_probability_examples() {
        assert_eq!(query_probability(0.0, 1), 1.0);
        assert_eq!(query_probability(0.5, 16), 0.5);
        assert!((query_probability(0.02, 100) - 0.1).abs() < 1e-15);
    }
}
