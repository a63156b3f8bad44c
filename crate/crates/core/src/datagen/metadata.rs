//! Exact expected losses of the generating policies.
//!
//! A non-random policy's row is `softmax(+-s * (a + sigma * Z))` where `a` are
//! the (possibly distorted) accuracies for the round's label and `Z` is
//! standard normal noise, so following it greedily picks model `j` with
//! probability `P(argmax_l (a_l + sigma * Z_l) = j)`. That probability is a
//! one-dimensional integral evaluated by Simpson's rule.

use statrs::distribution::{ContinuousCDF, Normal};

use super::spec::{PolicyKind, PolicySpec, SyntheticSpec};
use crate::select::TIE_TOLERANCE;

const QUAD_LIMIT: f64 = 10.0;
const QUAD_INTERVALS: usize = 4000;

/// Probability that each index is the argmax of `a + sigma * Z`.
pub fn argmax_probabilities(a: &[f64], sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        let top = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<bool> = a.iter().map(|&x| top - x <= TIE_TOLERANCE).collect();
        let count = tied.iter().filter(|&&t| t).count() as f64;
        return tied.iter().map(|&t| if t { 1.0 / count } else { 0.0 }).collect();
    }
    let std = Normal::standard();
    let h = 2.0 * QUAD_LIMIT / QUAD_INTERVALS as f64;
    let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut probs: Vec<f64> = (0..a.len())
        .map(|j| {
            let integrand = |z: f64| {
                let mut p = pdf(z);
                for (l, &al) in a.iter().enumerate() {
                    if l != j {
                        p *= std.cdf((a[j] - al) / sigma + z);
                    }
                }
                p
            };
            let mut sum = integrand(-QUAD_LIMIT) + integrand(QUAD_LIMIT);
            for i in 1..QUAD_INTERVALS {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                sum += w * integrand(-QUAD_LIMIT + i as f64 * h);
            }
            sum * h / 3.0
        })
        .collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    probs
}

/// The score vector a policy's row is a softmax of, before noise, for true label `y`.
/// `None` for policies whose greedy choice is uniform.
fn policy_scores(policy: &PolicySpec, accuracy_for_label: &[f64], y: usize) -> Option<Vec<f64>> {
    if policy.sharpness == 0.0 {
        return None;
    }
    match policy.kind {
        PolicyKind::Random => None,
        PolicyKind::Normal => Some(accuracy_for_label.to_vec()),
        PolicyKind::Biased => Some(if policy.biased_classes.contains(&y) {
            accuracy_for_label.iter().map(|a| 1.0 - a).collect()
        } else {
            accuracy_for_label.to_vec()
        }),
        PolicyKind::Malicious => Some(accuracy_for_label.iter().map(|a| -a).collect()),
    }
}

/// Expected per-round greedy-follow loss of every extended policy
/// (base policies first, then one constant policy per model).
pub fn expected_policy_losses(spec: &SyntheticSpec) -> Vec<f64> {
    let acc = spec
        .model_accuracies
        .as_ref()
        .map(|a| a.per_class(spec.c))
        .unwrap_or_else(|| vec![vec![0.5; spec.c]; spec.k]);
    let probs = spec.label_probs();
    let mut mu = vec![0.0; spec.n() + spec.k];
    for (y, &py) in probs.iter().enumerate() {
        if py == 0.0 {
            continue;
        }
        let acc_y: Vec<f64> = acc.iter().map(|row| row[y]).collect();
        let loss: Vec<f64> = acc_y.iter().map(|a| 1.0 - a).collect();
        let mean_loss = loss.iter().sum::<f64>() / spec.k as f64;
        for (i, policy) in spec.policies.iter().enumerate() {
            mu[i] += py
                * match policy_scores(policy, &acc_y, y) {
                    None => mean_loss,
                    Some(a) => argmax_probabilities(&a, spec.advice_noise)
                        .iter()
                        .zip(&loss)
                        .map(|(p, l)| p * l)
                        .sum(),
                };
        }
        for j in 0..spec.k {
            mu[spec.n() + j] += py * loss[j];
        }
    }
    mu
}

/// Best policy (lowest index on ties) and the gap to the runner-up.
pub fn best_and_gap(mu: &[f64]) -> (usize, f64) {
    let best = mu
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let gap = mu
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &m)| m - mu[best])
        .fold(f64::INFINITY, f64::min);
    (best, gap)
}
