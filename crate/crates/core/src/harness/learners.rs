use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineKind, BaselineLearner, BaselineParams, OracleLearner, DEFAULT_C0};
use crate::cams::{CamsConfig, CamsLearner, CamsSnapshot, QueryRule, Regime, Variant};
use crate::domain::{RoundRecord, StreamMeta, StreamRegime};
use crate::error::{Error, Result};
use crate::learner::{Learner, RoundOutcome};

pub const LEARNER_NAMES: [&str; 11] = [
    "rs",
    "mp",
    "qbc",
    "iwal",
    "cqbc",
    "ciwal",
    "oracle",
    "cams",
    "cams-max",
    "cams-random-policy",
    "cams-conventional",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum LearnerKind {
    Baseline { kind: BaselineKindTag },
    Oracle,
    Cams { variant: Variant },
}

/// Serializable mirror of [`BaselineKind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKindTag {
    Rs,
    Mp,
    Qbc,
    Iwal,
    Cqbc,
    Ciwal,
}

impl From<BaselineKindTag> for BaselineKind {
    fn from(tag: BaselineKindTag) -> Self {
        match tag {
            BaselineKindTag::Rs => BaselineKind::Rs,
            BaselineKindTag::Mp => BaselineKind::Mp,
            BaselineKindTag::Qbc => BaselineKind::Qbc,
            BaselineKindTag::Iwal => BaselineKind::Iwal,
            BaselineKindTag::Cqbc => BaselineKind::Cqbc,
            BaselineKindTag::Ciwal => BaselineKind::Ciwal,
        }
    }
}

/// A learner as requested by an experiment: a display name plus everything
/// needed to construct a fresh instance for each realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub name: String,
    pub kind: LearnerKind,
    #[serde(default)]
    pub query_rule: QueryRule,
    #[serde(default)]
    pub regularize_advice: bool,
    /// Overrides the regime inferred from the stream header.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
}

impl LearnerSpec {
    pub fn parse(name: &str) -> Result<Self> {
        let kind = match name {
            "rs" => LearnerKind::Baseline { kind: BaselineKindTag::Rs },
            "mp" => LearnerKind::Baseline { kind: BaselineKindTag::Mp },
            "qbc" => LearnerKind::Baseline { kind: BaselineKindTag::Qbc },
            "iwal" => LearnerKind::Baseline { kind: BaselineKindTag::Iwal },
            "cqbc" => LearnerKind::Baseline { kind: BaselineKindTag::Cqbc },
            "ciwal" => LearnerKind::Baseline { kind: BaselineKindTag::Ciwal },
            "oracle" => LearnerKind::Oracle,
            "cams" => LearnerKind::Cams { variant: Variant::Standard },
            "cams-max" => LearnerKind::Cams { variant: Variant::Max },
            "cams-random-policy" => LearnerKind::Cams { variant: Variant::RandomPolicy },
            "cams-conventional" => LearnerKind::Cams { variant: Variant::Conventional },
            other => {
                return Err(Error::Config(format!(
                    "unknown learner `{other}`; expected one of: {}",
                    LEARNER_NAMES.join(", ")
                )))
            }
        };
        Ok(Self {
            name: name.to_string(),
            kind,
            query_rule: QueryRule::Entropy,
            regularize_advice: false,
            regime: None,
        })
    }

    /// Parses a comma-separated list, rejecting empty lists and duplicates.
    pub fn parse_list(list: &str) -> Result<Vec<Self>> {
        let names: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if names.is_empty() {
            return Err(Error::Config(format!(
                "learner list is empty; expected some of: {}",
                LEARNER_NAMES.join(", ")
            )));
        }
        let mut specs = Vec::with_capacity(names.len());
        for name in names {
            if specs.iter().any(|s: &LearnerSpec| s.name == name) {
                return Err(Error::Config(format!("learner `{name}` listed twice")));
            }
            specs.push(Self::parse(name)?);
        }
        Ok(specs)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_query_rule(mut self, rule: QueryRule) -> Self {
        self.query_rule = rule;
        self
    }

    pub fn is_cams(&self) -> bool {
        matches!(self.kind, LearnerKind::Cams { .. })
    }

    fn cams_config(&self, meta: &StreamMeta, horizon: usize, budget: usize, seed: u64) -> Option<CamsConfig> {
        let LearnerKind::Cams { variant } = self.kind else {
            return None;
        };
        let regime = self.regime.unwrap_or(match meta.regime {
            StreamRegime::Stochastic => Regime::Stochastic,
            StreamRegime::Adversarial => Regime::Adversarial,
        });
        let mut config = CamsConfig::new(regime, variant, horizon, budget, seed);
        config.query_rule = self.query_rule;
        config.regularize_advice = self.regularize_advice;
        Some(config)
    }

    /// Fresh learner for one realization. `records` is the full realized
    /// stream (of length `meta.horizon`); only the oracle looks at it ahead of time.
    pub fn build(&self, meta: &StreamMeta, records: &[RoundRecord], budget: usize, seed: u64) -> Result<AnyLearner> {
        let horizon = meta.horizon;
        let learner = match self.kind {
            LearnerKind::Baseline { kind } => AnyLearner::Baseline(BaselineLearner::new(
                kind.into(),
                meta.c,
                meta.k,
                meta.n,
                BaselineParams {
                    horizon,
                    budget,
                    iwal_c0: DEFAULT_C0,
                    seed,
                },
            )?),
            LearnerKind::Oracle => AnyLearner::Oracle(OracleLearner::new(records, meta.c, budget, seed)?),
            LearnerKind::Cams { .. } => {
                let config = self.cams_config(meta, horizon, budget, seed).expect("cams kind");
                AnyLearner::Cams(CamsLearner::new(config, meta.c, meta.k, meta.n)?.with_name(self.name.clone()))
            }
        };
        Ok(learner)
    }

    /// CAMS learner resumed from a snapshot taken mid-stream.
    pub fn restore(
        &self,
        meta: &StreamMeta,
        horizon: usize,
        budget: usize,
        seed: u64,
        snapshot: &CamsSnapshot,
    ) -> Result<AnyLearner> {
        let config = self
            .cams_config(meta, horizon, budget, seed)
            .ok_or_else(|| Error::Config(format!("learner `{}` cannot be resumed (CAMS learners only)", self.name)))?;
        Ok(AnyLearner::Cams(
            CamsLearner::restore(config, meta.c, meta.k, meta.n, snapshot)?.with_name(self.name.clone()),
        ))
    }
}

/// Any of the learners the harness knows how to run.
#[derive(Debug, Clone)]
pub enum AnyLearner {
    Cams(CamsLearner),
    Baseline(BaselineLearner),
    Oracle(OracleLearner),
}

impl AnyLearner {
    pub fn snapshot(&self) -> Option<CamsSnapshot> {
        match self {
            AnyLearner::Cams(l) => Some(l.snapshot()),
            _ => None,
        }
    }

    fn inner(&self) -> &dyn Learner {
        match self {
            AnyLearner::Cams(l) => l,
            AnyLearner::Baseline(l) => l,
            AnyLearner::Oracle(l) => l,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Learner {
        match self {
            AnyLearner::Cams(l) => l,
            AnyLearner::Baseline(l) => l,
            AnyLearner::Oracle(l) => l,
        }
    }
}

impl Learner for AnyLearner {
    fn name(&self) -> &str {
        self.inner().name()
    }

    fn step(&mut self, record: &RoundRecord) -> Result<RoundOutcome> {
        self.inner_mut().step(record)
    }

    fn cost_spent(&self) -> usize {
        self.inner().cost_spent()
    }

    fn set_query_scale(&mut self, scale: f64) {
        self.inner_mut().set_query_scale(scale);
    }
}
