use serde::{Deserialize, Serialize};

use crate::domain::RoundRecord;
use crate::error::{Error, Result};

use super::Trajectory;

/// Lower and upper quantiles of the reported band.
pub const BAND_LO: f64 = 0.05;
pub const BAND_HI: f64 = 0.95;

/// Empirical quantile with linear interpolation between order statistics.
/// `sorted` must be ascending and non-empty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-round mean and, with at least two realizations, the 5%/95% band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub mean: Vec<f64>,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
}

impl Band {
    /// Aggregates equally long series, one per realization, in the order given.
    pub fn from_series(series: &[Vec<f64>]) -> Band {
        let r = series.len();
        let len = series.first().map_or(0, Vec::len);
        let mut mean = Vec::with_capacity(len);
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        let mut column = vec![0.0; r];
        for t in 0..len {
            for (slot, s) in column.iter_mut().zip(series) {
                *slot = s[t];
            }
            mean.push(column.iter().sum::<f64>() / r as f64);
            if r >= 2 {
                column.sort_by(f64::total_cmp);
                lo.push(quantile(&column, BAND_LO));
                hi.push(quantile(&column, BAND_HI));
            }
        }
        let bands = r >= 2;
        Band {
            mean,
            lo: bands.then_some(lo),
            hi: bands.then_some(hi),
        }
    }

    pub fn last_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }
}

/// Cumulative loss of each model over the stream prefix.
pub fn model_cumulative_losses(records: &[RoundRecord]) -> Vec<Vec<u64>> {
    let k = records.first().map_or(0, |r| r.predictions.len());
    let mut out = vec![Vec::with_capacity(records.len()); k];
    let mut totals = vec![0u64; k];
    for rec in records {
        for (j, &p) in rec.predictions.iter().enumerate() {
            totals[j] += u64::from(p != rec.true_label);
            out[j].push(totals[j]);
        }
    }
    out
}

/// Hindsight-best constant model (lowest index on ties) and its cumulative loss series.
pub fn best_model_series(records: &[RoundRecord]) -> (usize, Vec<u64>) {
    let per_model = model_cumulative_losses(records);
    let best = per_model
        .iter()
        .enumerate()
        .min_by_key(|(_, s)| s.last().copied().unwrap_or(0))
        .map(|(j, _)| j)
        .unwrap_or(0);
    let series = per_model.into_iter().nth(best).unwrap_or_default();
    (best, series)
}

/// `L_t(learner) - L_t(best model)`, where the best model is the
/// hindsight-argmin constant model on this stream. May be negative.
pub fn relative_cumulative_loss(traj: &Trajectory, records: &[RoundRecord]) -> Vec<f64> {
    let (_, best) = best_model_series(records);
    traj.cumulative_loss
        .iter()
        .zip(&best)
        .map(|(&l, &b)| l as f64 - b as f64)
        .collect()
}

/// Query scale applied after the first tenth of the stream:
/// `s = ((b - b_early) / (T - T/10)) * ((T/10) / b_early)`.
pub fn scaling_parameter(budget: usize, early_spent: usize, horizon: usize) -> Result<f64> {
    if early_spent == 0 {
        return Err(Error::Config("scaling parameter needs early spending b_early > 0".into()));
    }
    if horizon < 10 {
        return Err(Error::Config(format!("scaling parameter needs T >= 10, got {horizon}")));
    }
    let t = horizon as f64;
    let early = t / 10.0;
    Ok(((budget as f64 - early_spent as f64) / (t - early)) * (early / early_spent as f64))
}
