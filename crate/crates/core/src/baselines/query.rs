//! Query criteria of the comparison learners.

use crate::domain::{label_masses, snap_unit, Label};

/// Random sampling: constant `B / T`, clipped to `[0, 1]`.
pub fn rs_query(budget: usize, horizon: usize) -> f64 {
    if horizon == 0 {
        return 0.0;
    }
    (budget as f64 / horizon as f64).clamp(0.0, 1.0)
}

/// Model Picker variance `v = max_y l_y (1 - l_y)`, with `l_y` the expected
/// loss of `w` if the true label were `y`. Lies in `[0, 0.25]`.
pub fn mp_variance(predictions: &[Label], w: &[f64], classes: usize) -> f64 {
    label_masses(w, predictions, classes)
        .into_iter()
        .map(|mass| {
            let l = snap_unit(1.0 - mass);
            l * (1.0 - l)
        })
        .fold(0.0, f64::max)
}

/// Model Picker's learning-rate schedule `sqrt(ln k / t)`.
pub fn mp_rate(t: usize, models: usize) -> f64 {
    ((models as f64).ln() / t.max(1) as f64).sqrt()
}

/// `max(v, sqrt(ln k / t))` when `v != 0`, else 0; clipped to 1.
pub fn mp_query_probability(variance: f64, t: usize, models: usize) -> f64 {
    if variance == 0.0 {
        0.0
    } else {
        variance.max(mp_rate(t, models)).min(1.0)
    }
}

/// Normalized vote entropy of the committee's predictions:
/// `-(1 / ln min(k, c)) * sum_y (V_y / k) ln(V_y / k)`.
pub fn qbc_vote_entropy(predictions: &[Label], classes: usize) -> f64 {
    let k = predictions.len();
    if k < 2 {
        return 0.0;
    }
    let mut votes = vec![0usize; classes];
    for &p in predictions {
        votes[p] += 1;
    }
    let norm = (k.min(classes) as f64).ln();
    let h: f64 = votes
        .into_iter()
        .filter(|&v| v > 0)
        .map(|v| {
            let f = v as f64 / k as f64;
            -f * f.ln()
        })
        .sum();
    (h / norm).clamp(0.0, 1.0)
}
