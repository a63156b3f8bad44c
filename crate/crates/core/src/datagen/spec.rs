use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::SIMPLEX_TOLERANCE;
use crate::error::{Error, Result};

pub const DEFAULT_ADVICE_NOISE: f64 = 0.05;

/// Model accuracies, either one value per model or a `k x c` matrix of
/// per-class accuracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Accuracies {
    Global(Vec<f64>),
    PerClass(Vec<Vec<f64>>),
}

impl Accuracies {
    pub fn models(&self) -> usize {
        match self {
            Accuracies::Global(a) => a.len(),
            Accuracies::PerClass(a) => a.len(),
        }
    }

    /// Expands to the `k x c` per-class form.
    pub fn per_class(&self, classes: usize) -> Vec<Vec<f64>> {
        match self {
            Accuracies::Global(a) => a.iter().map(|&x| vec![x; classes]).collect(),
            Accuracies::PerClass(a) => a.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Normal,
    Biased,
    Random,
    Malicious,
}

fn default_sharpness() -> f64 {
    1.0
}

fn default_biased_classes() -> Vec<usize> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    #[serde(default = "default_sharpness")]
    pub sharpness: f64,
    /// Classes on which a biased policy inverts its accuracy estimates.
    #[serde(default = "default_biased_classes")]
    pub biased_classes: Vec<usize>,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, sharpness: f64) -> Self {
        Self {
            kind,
            sharpness,
            biased_classes: default_biased_classes(),
        }
    }

    pub fn biased(sharpness: f64, classes: Vec<usize>) -> Self {
        Self {
            kind: PolicyKind::Biased,
            sharpness,
            biased_classes: classes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecRegime {
    #[default]
    Stochastic,
    AdversarialSegments,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub length: usize,
    pub dominant_model: usize,
}

/// Recipe for a synthetic stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub c: usize,
    pub k: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    /// Required for stochastic streams; adversarial segments set their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_accuracies: Option<Accuracies>,
    #[serde(default)]
    pub policies: Vec<PolicySpec>,
    /// Uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_distribution: Option<Vec<f64>>,
    #[serde(default)]
    pub regime: SpecRegime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<Segment>>,
    /// Standard deviation of the per-round noise on a policy's accuracy estimates.
    #[serde(default = "default_noise")]
    pub advice_noise: f64,
    #[serde(default)]
    pub require_unique_best: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_noise() -> f64 {
    DEFAULT_ADVICE_NOISE
}

fn field(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{path}: {msg}"))
}

fn check_simplex(path: &str, v: &[f64]) -> Result<()> {
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= 0.0)) {
        return Err(field(&format!("{path}[{i}]"), format!("{x} is not a probability")));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(field(path, format!("sums to {sum}, not 1 (tolerance {SIMPLEX_TOLERANCE:e})")));
    }
    Ok(())
}

impl SyntheticSpec {
    pub fn n(&self) -> usize {
        self.policies.len()
    }

    pub fn label_probs(&self) -> Vec<f64> {
        self.label_distribution
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.c as f64; self.c])
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.c < 2 {
            return Err(field("c", format!("{} (need at least 2 classes)", self.c)));
        }
        if self.k < 2 {
            return Err(field("k", format!("{} (need at least 2 models)", self.k)));
        }
        if self.horizon < 1 {
            return Err(field("T", "must be at least 1"));
        }
        if !(self.advice_noise.is_finite() && self.advice_noise >= 0.0) {
            return Err(field("advice_noise", format!("{} must be non-negative", self.advice_noise)));
        }
        if let Some(p) = &self.label_distribution {
            if p.len() != self.c {
                return Err(field("label_distribution", format!("has {} entries, expected c = {}", p.len(), self.c)));
            }
            check_simplex("label_distribution", p)?;
        }
        for (i, p) in self.policies.iter().enumerate() {
            if !p.sharpness.is_finite() || p.sharpness < 0.0 {
                return Err(field(&format!("policies[{i}].sharpness"), format!("{} must be non-negative", p.sharpness)));
            }
            if let Some(&y) = p.biased_classes.iter().find(|&&y| y >= self.c) {
                return Err(field(&format!("policies[{i}].biased_classes"), format!("class {y} out of range")));
            }
        }
        if let Some(acc) = &self.model_accuracies {
            if acc.models() != self.k {
                return Err(field("model_accuracies", format!("has {} models, expected k = {}", acc.models(), self.k)));
            }
            for (j, row) in acc.per_class(self.c).iter().enumerate() {
                if row.len() != self.c {
                    return Err(field(
                        &format!("model_accuracies[{j}]"),
                        format!("has {} classes, expected c = {}", row.len(), self.c),
                    ));
                }
                if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                    return Err(field(&format!("model_accuracies[{j}]"), format!("{x} outside [0, 1]")));
                }
            }
        }
        match self.regime {
            SpecRegime::Stochastic => {
                if self.model_accuracies.is_none() {
                    return Err(field("model_accuracies", "required for stochastic streams"));
                }
            }
            SpecRegime::AdversarialSegments => {
                let segs = self
                    .segments
                    .as_ref()
                    .ok_or_else(|| field("segments", "required for adversarial_segments"))?;
                if segs.is_empty() {
                    return Err(field("segments", "must not be empty"));
                }
                if let Some((i, s)) = segs.iter().enumerate().find(|(_, s)| s.dominant_model >= self.k) {
                    return Err(field(&format!("segments[{i}].dominant_model"), format!("{} out of range", s.dominant_model)));
                }
                let total: usize = segs.iter().map(|s| s.length).sum();
                if total != self.horizon {
                    return Err(field("segments", format!("lengths sum to {total}, expected T = {}", self.horizon)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
c = 2
k = 2
T = 100
model_accuracies = [0.9, 0.7]
label_distribution = [0.5, 0.5]

[[policies]]
kind = "normal"
sharpness = 10.0

[[policies]]
kind = "biased"
biased_classes = [1]
"#;

    #[test]
    fn parses_toml() {
        let spec = SyntheticSpec::from_toml_str(SAMPLE).unwrap();
        assert_eq!(spec.n(), 2);
        assert_eq!(spec.policies[1].sharpness, 1.0);
        assert_eq!(spec.model_accuracies, Some(Accuracies::Global(vec![0.9, 0.7])));
        assert_eq!(spec.advice_noise, DEFAULT_ADVICE_NOISE);
        let again = SyntheticSpec::from_toml_str(&spec.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn per_class_accuracies_parse() {
        let text = "c = 2\nk = 2\nT = 5\nmodel_accuracies = [[1.0, 0.5], [0.5, 1.0]]\n";
        let spec = SyntheticSpec::from_toml_str(text).unwrap();
        assert!(matches!(spec.model_accuracies, Some(Accuracies::PerClass(_))));
    }

    #[test]
    fn bad_simplex_names_field() {
        let text = SAMPLE.replace("[0.5, 0.5]", "[0.5, 0.3]");
        let err = SyntheticSpec::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("label_distribution"), "{err}");
    }

    #[test]
    fn segment_lengths_must_cover_horizon() {
        let text = "c = 2\nk = 2\nT = 10\nregime = \"adversarial_segments\"\nsegments = [{length = 4, dominant_model = 0}, {length = 5, dominant_model = 1}]\n";
        let err = SyntheticSpec::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("segments"), "{err}");
    }

    #[test]
    fn accuracy_out_of_range() {
        let text = SAMPLE.replace("0.9, 0.7", "1.2, 0.7");
        assert!(SyntheticSpec::from_toml_str(&text).is_err());
    }
}
