//! Shared domain types and the loss/distribution algebra every learner uses.
//!
//! Index layout of the extended policy set: base policies occupy
//! `0..n`, the constant policy for model `j` sits at `n + j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense class-label id in `0..c`.
pub type Label = usize;

/// Tolerance used when checking that a vector lies on the probability simplex.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Values this close to 0 or 1 are treated as exactly 0 or 1 when testing
/// membership of the open unit interval.
pub const UNIT_SNAP: f64 = 1e-12;

pub(crate) fn snap_unit(x: f64) -> f64 {
    if x.abs() <= UNIT_SNAP {
        0.0
    } else if (1.0 - x).abs() <= UNIT_SNAP {
        1.0
    } else {
        x
    }
}

fn check_simplex(row_index: usize, row: &[f64]) -> Result<()> {
    for (col, &v) in row.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidEntry {
                row: row_index,
                col,
                value: v,
            });
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::NotSimplex {
            row: row_index,
            sum,
            tolerance: SIMPLEX_TOLERANCE,
        });
    }
    Ok(())
}

/// Row-stochastic matrix: one row per policy, one column per model.
#[derive(Debug, Clone, PartialEq)]
pub struct AdviceMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl AdviceMatrix {
    /// Builds a matrix from explicit rows, rejecting any row that is not a
    /// distribution. Rows are never renormalized.
    pub fn from_rows(cols: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: "advice row length",
                    expected: cols,
                    found: row.len(),
                });
            }
            check_simplex(i, row)?;
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Empty matrix (no policies) over `cols` models.
    pub fn empty(cols: usize) -> Self {
        Self {
            rows: 0,
            cols,
            data: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Applies `f` to every row. The caller guarantees `f` maps distributions to distributions.
    pub(crate) fn map_rows(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.rows() {
            data.extend(f(row));
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

/// Appends the `k` constant policies `e_0..e_{k-1}` below the base advice.
pub fn extend_advice(advice: &AdviceMatrix) -> AdviceMatrix {
    let k = advice.cols;
    let mut data = Vec::with_capacity((advice.rows + k) * k);
    data.extend_from_slice(&advice.data);
    for j in 0..k {
        data.extend((0..k).map(|c| if c == j { 1.0 } else { 0.0 }));
    }
    AdviceMatrix {
        rows: advice.rows + k,
        cols: k,
        data,
    }
}

/// Validating variant of [`extend_advice`] for raw rows coming from outside.
pub fn extend_advice_rows(cols: usize, rows: &[Vec<f64>]) -> Result<AdviceMatrix> {
    AdviceMatrix::from_rows(cols, rows).map(|m| extend_advice(&m))
}

/// Per-model loss vector: raw 0-1 losses or their importance-weighted version.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector(pub Vec<f64>);

impl LossVector {
    pub fn scaled(&self, factor: f64) -> LossVector {
        LossVector(self.0.iter().map(|l| l * factor).collect())
    }

    /// Expected loss `<row, self>` of a policy row.
    pub fn expected_under(&self, row: &[f64]) -> f64 {
        row.iter().zip(&self.0).map(|(p, l)| p * l).sum()
    }
}

/// 0-1 loss of every model against the true label.
pub fn model_losses(predictions: &[Label], true_label: Label, classes: usize) -> Result<LossVector> {
    check_label(true_label, classes)?;
    predictions
        .iter()
        .map(|&p| {
            check_label(p, classes)?;
            Ok(if p == true_label { 0.0 } else { 1.0 })
        })
        .collect::<Result<Vec<_>>>()
        .map(LossVector)
}

fn check_label(label: Label, classes: usize) -> Result<()> {
    if label >= classes {
        Err(Error::LabelOutOfRange { label, classes })
    } else {
        Ok(())
    }
}

/// Distribution over the extended policy set together with the cumulative
/// (importance-weighted) losses it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyWeights {
    pub weights: Vec<f64>,
    pub cumulative_losses: Vec<f64>,
}

impl PolicyWeights {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Distribution over models.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDistribution(pub Vec<f64>);

impl ModelDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

/// Policy-weighted mixture of advice rows: `w = sum_i q_i * pi_i`.
pub fn induced_model_distribution(weights: &[f64], advice: &AdviceMatrix) -> Result<ModelDistribution> {
    if weights.len() != advice.n_rows() {
        return Err(Error::DimensionMismatch {
            what: "policy weights vs advice rows",
            expected: advice.n_rows(),
            found: weights.len(),
        });
    }
    let mut probs = vec![0.0; advice.n_cols()];
    for (q, row) in weights.iter().zip(advice.rows()) {
        if *q == 0.0 {
            continue;
        }
        for (acc, p) in probs.iter_mut().zip(row) {
            *acc += q * p;
        }
    }
    Ok(ModelDistribution(probs))
}

/// Probability mass `w` puts on models predicting `label`.
pub fn label_mass(w: &[f64], predictions: &[Label], label: Label) -> Result<f64> {
    if w.len() != predictions.len() {
        return Err(Error::DimensionMismatch {
            what: "model distribution vs predictions",
            expected: predictions.len(),
            found: w.len(),
        });
    }
    Ok(w
        .iter()
        .zip(predictions)
        .filter(|(_, &p)| p == label)
        .map(|(m, _)| m)
        .sum())
}

/// `label_mass` for every label at once, in a single pass.
pub(crate) fn label_masses(w: &[f64], predictions: &[Label], classes: usize) -> Vec<f64> {
    let mut mass = vec![0.0; classes];
    for (m, &p) in w.iter().zip(predictions) {
        mass[p] += m;
    }
    mass
}

/// Pulls a policy row toward uniform so every model keeps positive mass:
/// `(row + eta) / (1 + k * eta)` with `eta` the squared distance to uniform.
pub fn regularize_policy_row(row: &[f64]) -> Result<Vec<f64>> {
    check_simplex(0, row)?;
    Ok(regularize_unchecked(row))
}

pub(crate) fn regularize_unchecked(row: &[f64]) -> Vec<f64> {
    let k = row.len() as f64;
    let eta: f64 = row.iter().map(|p| (p - 1.0 / k).powi(2)).sum();
    row.iter().map(|p| (p + eta) / (1.0 + k * eta)).collect()
}

/// One stream step as seen by a learner.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based.
    pub round_index: usize,
    pub predictions: Vec<Label>,
    pub true_label: Label,
    /// Base (non-constant) policies only.
    pub advice: AdviceMatrix,
}

impl RoundRecord {
    pub fn validate(&self, classes: usize, models: usize, policies: usize) -> Result<()> {
        if self.round_index == 0 {
            return Err(Error::RoundOutOfOrder {
                expected: 1,
                found: 0,
            });
        }
        if self.predictions.len() != models {
            return Err(Error::DimensionMismatch {
                what: "predictions",
                expected: models,
                found: self.predictions.len(),
            });
        }
        for &p in &self.predictions {
            check_label(p, classes)?;
        }
        check_label(self.true_label, classes)?;
        if self.advice.n_rows() != policies {
            return Err(Error::DimensionMismatch {
                what: "advice rows",
                expected: policies,
                found: self.advice.n_rows(),
            });
        }
        if self.advice.n_cols() != models {
            return Err(Error::DimensionMismatch {
                what: "advice columns",
                expected: models,
                found: self.advice.n_cols(),
            });
        }
        Ok(())
    }

    /// True when every model predicts the same label.
    pub fn is_unanimous(&self) -> bool {
        self.predictions.windows(2).all(|w| w[0] == w[1])
    }

    pub fn losses(&self) -> Vec<f64> {
        self.predictions
            .iter()
            .map(|&p| if p == self.true_label { 0.0 } else { 1.0 })
            .collect()
    }
}

/// Whether stream order is exchangeable (i.i.d. draws) or fixed by an adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StreamRegime {
    #[default]
    Stochastic,
    Adversarial,
}

/// Stream header. Gap metadata is generator-side ground truth and never read by learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamMeta {
    pub c: usize,
    pub k: usize,
    pub n: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default)]
    pub regime: StreamRegime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_policy_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_gamma: Option<f64>,
}

impl StreamMeta {
    pub fn validate(&self) -> Result<()> {
        if self.c < 2 {
            return Err(Error::Config(format!("c = {} (need at least 2 classes)", self.c)));
        }
        if self.k < 2 {
            return Err(Error::Config(format!("k = {} (need at least 2 models)", self.k)));
        }
        if self.horizon < 1 {
            return Err(Error::Config("T must be at least 1".into()));
        }
        if let Some(d) = self.gap_delta {
            if d.is_nan() || d <= 0.0 {
                return Err(Error::Config(format!("gap_delta = {d} must be positive")));
            }
        }
        if let Some(b) = self.best_policy_index {
            if b >= self.n + self.k {
                return Err(Error::Config(format!(
                    "best_policy_index {b} outside extended policy set of size {}",
                    self.n + self.k
                )));
            }
        }
        Ok(())
    }

    /// Size of the extended policy set.
    pub fn extended_policies(&self) -> usize {
        self.n + self.k
    }
}
