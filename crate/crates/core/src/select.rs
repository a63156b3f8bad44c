//! Argmax/argmin with uniform random tie-breaking, and inverse-CDF sampling.

use rand::Rng;

/// Entries within this distance of the extremum count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

fn pick<R: Rng + ?Sized>(candidates: &[usize], rng: &mut R) -> usize {
    match candidates {
        [only] => *only,
        _ => candidates[rng.random_range(0..candidates.len())],
    }
}

/// Indices whose value is within [`TIE_TOLERANCE`] of the maximum.
pub fn argmax_set(values: &[f64]) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= best - TIE_TOLERANCE)
        .map(|(i, _)| i)
        .collect()
}

pub fn argmax<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    pick(&argmax_set(values), rng)
}

pub fn argmin<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let set: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= best + TIE_TOLERANCE)
        .map(|(i, _)| i)
        .collect();
    pick(&set, rng)
}

/// First index whose cumulative probability exceeds `u` (`u` in `[0, 1)`).
/// Falls back to the last positive entry when rounding leaves the total below `u`.
pub fn inverse_cdf(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}

pub fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    inverse_cdf(probs, rng.random::<f64>())
}
