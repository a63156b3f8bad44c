use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::learners::LearnerSpec;
use super::metrics::{best_model_series, Band};
use super::realization::{run_rounds, Trajectory};
use crate::cams::CamsSnapshot;
use crate::baselines::greedy_follow_loss;
use crate::datagen::{
    best_and_gap, expected_policy_losses, gen_stochastic_with, generate, SpecRegime, StreamFile, SyntheticSpec,
};
use crate::domain::{extend_advice, RoundRecord, StreamMeta, StreamRegime};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

pub const DEFAULT_REALIZATIONS: usize = 50;
pub const CHECKPOINT_SCHEMA: &str = "cams-run-checkpoint/1";

/// Where each realization's stream comes from.
#[derive(Debug, Clone)]
pub enum StreamSource {
    /// A fixed stream. Stochastic streams are reshuffled per realization;
    /// adversarial ones are replayed in their fixed order.
    Fixed(StreamFile),
    /// A fresh stream drawn from the spec for every realization. Build with
    /// [`StreamSource::synthetic`], which computes the gap metadata once.
    Synthetic {
        spec: SyntheticSpec,
        expected_losses: Option<Vec<f64>>,
    },
}

impl StreamSource {
    pub fn synthetic(spec: SyntheticSpec) -> Result<Self> {
        spec.validate()?;
        let expected_losses = (spec.regime == SpecRegime::Stochastic).then(|| expected_policy_losses(&spec));
        Ok(StreamSource::Synthetic { spec, expected_losses })
    }

    pub fn meta(&self) -> Result<StreamMeta> {
        match self {
            StreamSource::Fixed(s) => Ok(s.meta.clone()),
            StreamSource::Synthetic { spec, expected_losses } => {
                let stochastic = expected_losses.is_some();
                let (best, delta) = match expected_losses {
                    Some(mu) => {
                        let (best, delta) = best_and_gap(mu);
                        (Some(best), (delta > 0.0).then_some(delta))
                    }
                    None => (None, None),
                };
                Ok(StreamMeta {
                    c: spec.c,
                    k: spec.k,
                    n: spec.n(),
                    horizon: spec.horizon,
                    regime: if stochastic {
                        StreamRegime::Stochastic
                    } else {
                        StreamRegime::Adversarial
                    },
                    best_policy_index: best,
                    gap_delta: delta,
                    gap_gamma: None,
                })
            }
        }
    }

    /// Stream for realization `r`, truncated to `rounds` if given.
    pub fn realize(&self, master: u64, r: usize, rounds: Option<usize>) -> Result<StreamFile> {
        let mut stream = match self {
            StreamSource::Fixed(s) => {
                let mut s = s.clone();
                if s.meta.regime == StreamRegime::Stochastic {
                    let mut rng = rng_from_seed(derive_seed(master, r as u64, "order"));
                    s.records.shuffle(&mut rng);
                    for (i, rec) in s.records.iter_mut().enumerate() {
                        rec.round_index = i + 1;
                    }
                }
                s
            }
            StreamSource::Synthetic { spec, expected_losses } => {
                let seed = derive_seed(master, r as u64, "stream");
                match expected_losses {
                    Some(mu) => gen_stochastic_with(spec, seed, mu)?,
                    None => generate(spec, seed)?,
                }
            }
        };
        if let Some(n) = rounds {
            if n == 0 || n > stream.records.len() {
                return Err(Error::Config(format!(
                    "rounds = {n} outside 1..={}",
                    stream.records.len()
                )));
            }
            stream.records.truncate(n);
            stream.meta.horizon = n;
        }
        Ok(stream)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub learners: Vec<LearnerSpec>,
    /// Label budget; `None` means `T` (full information).
    pub budget: Option<usize>,
    pub realizations: usize,
    pub seed: u64,
    pub scale_early: bool,
    pub rounds: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(learners: Vec<LearnerSpec>, budget: Option<usize>, realizations: usize, seed: u64) -> Self {
        Self {
            learners,
            budget,
            realizations,
            seed,
            scale_early: false,
            rounds: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.learners.is_empty() {
            return Err(Error::Config("learners: at least one learner is required".into()));
        }
        if self.realizations == 0 {
            return Err(Error::Config("realizations: must be at least 1".into()));
        }
        for (i, a) in self.learners.iter().enumerate() {
            if self.learners[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Config(format!("learners: `{}` listed twice", a.name)));
            }
        }
        Ok(())
    }

    pub fn learner_seed(&self, r: usize, name: &str) -> u64 {
        derive_seed(self.seed, r as u64, name)
    }
}

/// Everything measured on one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    pub trajectories: Vec<Trajectory>,
    /// Cumulative loss of the hindsight-best constant model.
    pub best_model: Vec<u64>,
    /// Cumulative greedy-follow loss of the header's best policy, when known.
    pub best_policy: Option<Vec<f64>>,
}

/// Cumulative loss of following policy `index` of the extended set greedily.
pub fn policy_follow_series(records: &[RoundRecord], index: usize) -> Vec<f64> {
    let mut total = 0.0;
    records
        .iter()
        .map(|rec| {
            total += greedy_follow_loss(extend_advice(&rec.advice).row(index), &rec.losses());
            total
        })
        .collect()
}

fn realization_context(stream: &StreamFile) -> (Vec<u64>, Option<Vec<f64>>) {
    let (_, best_model) = best_model_series(&stream.records);
    let best_policy = stream
        .meta
        .best_policy_index
        .map(|i| policy_follow_series(&stream.records, i));
    (best_model, best_policy)
}

/// The configured budget, or `T` of the (possibly truncated) stream.
fn budget_for(config: &ExperimentConfig, horizon: usize) -> usize {
    config.budget.unwrap_or(config.rounds.unwrap_or(horizon))
}

/// Runs every learner over realization `r`, optionally stopping after `stop_after` rounds.
fn run_one(
    config: &ExperimentConfig,
    source: &StreamSource,
    r: usize,
    stop_after: Option<usize>,
    resume: Option<&RealizationCheckpoint>,
) -> Result<(RealizationResult, Option<RealizationCheckpoint>)> {
    let stream = source.realize(config.seed, r, config.rounds)?;
    let budget = budget_for(config, stream.meta.horizon);
    let horizon = stream.records.len();
    let end = stop_after.map_or(horizon, |s| s.min(horizon));
    let mut trajectories = Vec::with_capacity(config.learners.len());
    let mut snapshots = Vec::new();
    for (i, spec) in config.learners.iter().enumerate() {
        let seed = config.learner_seed(r, &spec.name);
        let (mut learner, mut traj, start) = match resume {
            Some(ckpt) => {
                let entry = &ckpt.learners[i];
                let learner = spec.restore(&stream.meta, horizon, budget, seed, &entry.snapshot)?;
                (learner, entry.trajectory.clone(), entry.trajectory.len())
            }
            None => (spec.build(&stream.meta, &stream.records, budget, seed)?, Trajectory::default(), 0),
        };
        run_rounds(&mut learner, &stream.records, start..end, budget, config.scale_early, &mut traj)?;
        if stop_after.is_some() {
            let snapshot = learner
                .snapshot()
                .ok_or_else(|| Error::Config(format!("learner `{}` cannot be checkpointed (CAMS learners only)", spec.name)))?;
            snapshots.push(LearnerCheckpoint {
                name: spec.name.clone(),
                snapshot,
                trajectory: traj.clone(),
            });
        }
        trajectories.push(traj);
    }
    let (best_model, best_policy) = realization_context(&stream);
    let checkpoint = stop_after.map(|_| RealizationCheckpoint { learners: snapshots });
    Ok((
        RealizationResult {
            trajectories,
            best_model,
            best_policy,
        },
        checkpoint,
    ))
}

/// Aggregated curves for one learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerReport {
    pub name: String,
    pub cumulative_loss: Band,
    pub queries: Band,
    pub rcl: Band,
    /// Cumulative loss minus the best policy's greedy-follow loss.
    pub regret: Option<Band>,
    pub final_loss: Vec<f64>,
    pub final_queries: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub horizon: usize,
    pub realizations: usize,
    pub budget: usize,
    pub learners: Vec<LearnerReport>,
    /// Final loss of the hindsight-best constant model, per realization.
    pub best_model_final: Vec<f64>,
}

impl ExperimentReport {
    pub fn learner(&self, name: &str) -> Option<&LearnerReport> {
        self.learners.iter().find(|l| l.name == name)
    }

    pub fn aggregate(config: &ExperimentConfig, budget: usize, results: &[RealizationResult]) -> Self {
        let horizon = results.first().map_or(0, |r| r.best_model.len());
        let learners = config
            .learners
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let series = |f: &dyn Fn(&RealizationResult, &Trajectory) -> Vec<f64>| {
                    results.iter().map(|r| f(r, &r.trajectories[i])).collect::<Vec<_>>()
                };
                let loss = series(&|_, t| t.cumulative_loss.iter().map(|&x| x as f64).collect());
                let queries = series(&|_, t| t.cumulative_queries.iter().map(|&x| x as f64).collect());
                let rcl = series(&|r, t| {
                    t.cumulative_loss
                        .iter()
                        .zip(&r.best_model)
                        .map(|(&l, &b)| l as f64 - b as f64)
                        .collect()
                });
                let regret = results.iter().all(|r| r.best_policy.is_some()).then(|| {
                    Band::from_series(&series(&|r, t| {
                        let best = r.best_policy.as_ref().expect("checked");
                        t.cumulative_loss.iter().zip(best).map(|(&l, &b)| l as f64 - b).collect()
                    }))
                });
                LearnerReport {
                    name: spec.name.clone(),
                    final_loss: loss.iter().map(|s| s.last().copied().unwrap_or(0.0)).collect(),
                    final_queries: queries.iter().map(|s| s.last().copied().unwrap_or(0.0)).collect(),
                    cumulative_loss: Band::from_series(&loss),
                    queries: Band::from_series(&queries),
                    rcl: Band::from_series(&rcl),
                    regret,
                }
            })
            .collect();
        ExperimentReport {
            horizon,
            realizations: results.len(),
            budget,
            learners,
            best_model_final: results
                .iter()
                .map(|r| r.best_model.last().copied().unwrap_or(0) as f64)
                .collect(),
        }
    }
}

fn run_all(
    config: &ExperimentConfig,
    source: &StreamSource,
    stop_after: Option<usize>,
    resume: Option<&RunCheckpoint>,
) -> Result<Vec<(RealizationResult, Option<RealizationCheckpoint>)>> {
    config.validate()?;
    (0..config.realizations)
        .into_par_iter()
        .map(|r| run_one(config, source, r, stop_after, resume.map(|c| &c.realizations[r])))
        .collect()
}

/// Runs every learner on `config.realizations` realizations in parallel and
/// returns the raw per-realization results in realization order.
pub fn run_realizations(config: &ExperimentConfig, source: &StreamSource) -> Result<Vec<RealizationResult>> {
    Ok(run_all(config, source, None, None)?.into_iter().map(|(r, _)| r).collect())
}

/// Runs and aggregates. Results are reduced in realization order, so thread
/// count never changes the output.
pub fn run_experiment(config: &ExperimentConfig, source: &StreamSource) -> Result<ExperimentReport> {
    let results = run_realizations(config, source)?;
    Ok(ExperimentReport::aggregate(config, effective_budget(config, source)?, &results))
}

pub fn effective_budget(config: &ExperimentConfig, source: &StreamSource) -> Result<usize> {
    Ok(budget_for(config, source.meta()?.horizon))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerCheckpoint {
    pub name: String,
    pub snapshot: CamsSnapshot,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationCheckpoint {
    pub learners: Vec<LearnerCheckpoint>,
}

/// Partial run: the configuration it was started with plus every learner's
/// state after `stop_after` rounds of each realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunCheckpoint {
    pub schema: String,
    pub config: ExperimentConfig,
    pub stop_after: usize,
    pub realizations: Vec<RealizationCheckpoint>,
}

impl RunCheckpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed checkpoint: {e}")))?;
        if ckpt.schema != CHECKPOINT_SCHEMA {
            return Err(Error::Config(format!(
                "checkpoint schema `{}` is not `{CHECKPOINT_SCHEMA}`",
                ckpt.schema
            )));
        }
        Ok(ckpt)
    }
}

/// Runs the first `stop_after` rounds of every realization and returns the
/// resumable state. Only CAMS learners can be checkpointed.
pub fn run_until(config: &ExperimentConfig, source: &StreamSource, stop_after: usize) -> Result<RunCheckpoint> {
    if let Some(spec) = config.learners.iter().find(|s| !s.is_cams()) {
        return Err(Error::Config(format!(
            "learner `{}` cannot be checkpointed (CAMS learners only)",
            spec.name
        )));
    }
    let realizations = run_all(config, source, Some(stop_after), None)?
        .into_iter()
        .map(|(_, c)| c.expect("checkpoint requested"))
        .collect();
    Ok(RunCheckpoint {
        schema: CHECKPOINT_SCHEMA.to_string(),
        config: config.clone(),
        stop_after,
        realizations,
    })
}

/// Finishes a checkpointed run; the results equal the uninterrupted run's.
pub fn resume_realizations(checkpoint: &RunCheckpoint, source: &StreamSource) -> Result<Vec<RealizationResult>> {
    let config = &checkpoint.config;
    config.validate()?;
    if checkpoint.realizations.len() != config.realizations
        || checkpoint
            .realizations
            .iter()
            .any(|r| r.learners.len() != config.learners.len())
    {
        return Err(Error::Config("checkpoint does not match its own configuration".into()));
    }
    Ok(run_all(config, source, None, Some(checkpoint))?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}

pub fn resume_experiment(checkpoint: &RunCheckpoint, source: &StreamSource) -> Result<ExperimentReport> {
    let results = resume_realizations(checkpoint, source)?;
    Ok(ExperimentReport::aggregate(
        &checkpoint.config,
        effective_budget(&checkpoint.config, source)?,
        &results,
    ))
}

/// Final mean cumulative loss per learner for each budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub budgets: Vec<usize>,
    pub learners: Vec<String>,
    /// `mean[b][l]`, with 5%/95% quantiles alongside.
    pub mean: Vec<Vec<f64>>,
    pub lo: Vec<Vec<Option<f64>>>,
    pub hi: Vec<Vec<Option<f64>>>,
}

pub fn budget_sweep(config: &ExperimentConfig, source: &StreamSource, budgets: &[usize]) -> Result<SweepTable> {
    if budgets.is_empty() {
        return Err(Error::Config("budgets: at least one budget is required".into()));
    }
    let mut table = SweepTable {
        budgets: budgets.to_vec(),
        learners: config.learners.iter().map(|l| l.name.clone()).collect(),
        mean: Vec::new(),
        lo: Vec::new(),
        hi: Vec::new(),
    };
    for &b in budgets {
        let cfg = ExperimentConfig {
            budget: Some(b),
            ..config.clone()
        };
        let report = run_experiment(&cfg, source)?;
        table.mean.push(report.learners.iter().map(|l| l.cumulative_loss.last_mean()).collect());
        table.lo.push(report.learners.iter().map(|l| l.cumulative_loss.lo.as_ref().and_then(|v| v.last().copied())).collect());
        table.hi.push(report.learners.iter().map(|l| l.cumulative_loss.hi.as_ref().and_then(|v| v.last().copied())).collect());
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::presets;

    fn small_source(horizon: usize) -> StreamSource {
        let mut spec = presets::standard();
        spec.horizon = horizon;
        StreamSource::synthetic(spec).unwrap()
    }

    fn learners(names: &str) -> Vec<LearnerSpec> {
        LearnerSpec::parse_list(names).unwrap()
    }

    #[test]
    fn single_realization_reports_means_only() {
        let cfg = ExperimentConfig::new(learners("cams,rs"), Some(20), 1, 5);
        let report = run_experiment(&cfg, &small_source(200)).unwrap();
        assert_eq!(report.learners.len(), 2);
        assert!(report.learners[0].cumulative_loss.lo.is_none());
        assert_eq!(report.learners[0].cumulative_loss.mean.len(), 200);
    }

    #[test]
    fn adversarial_fixed_stream_is_not_reshuffled() {
        let stream = generate(&presets::adversarial(), 1).unwrap();
        let source = StreamSource::Fixed(stream.clone());
        assert_eq!(source.realize(3, 7, None).unwrap(), stream);
        let mut stoch = presets::standard();
        stoch.horizon = 50;
        let s = generate(&stoch, 1).unwrap();
        let shuffled = StreamSource::Fixed(s.clone()).realize(3, 7, None).unwrap();
        assert_ne!(shuffled, s);
        assert!(shuffled.records.iter().enumerate().all(|(i, r)| r.round_index == i + 1));
    }

    #[test]
    fn deterministic_learner_on_fixed_stream_has_zero_width_band() {
        // the oracle follows a fixed row greedily; on a fixed stream its
        // choices do not depend on the learner seed
        let stream = generate(&presets::adversarial(), 2).unwrap();
        let cfg = ExperimentConfig::new(learners("oracle"), Some(0), 4, 1);
        let report = run_experiment(&cfg, &StreamSource::Fixed(stream)).unwrap();
        let band = &report.learners[0].cumulative_loss;
        assert_eq!(band.lo.as_ref().unwrap(), &band.mean);
        assert_eq!(band.hi.as_ref().unwrap(), &band.mean);
    }

    #[test]
    fn parallel_and_repeated_runs_agree() {
        let cfg = ExperimentConfig::new(learners("cams,iwal,mp"), Some(30), 6, 11);
        let a = run_experiment(&cfg, &small_source(150)).unwrap();
        let b = run_experiment(&cfg, &small_source(150)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adding_a_learner_leaves_others_untouched() {
        let a = run_experiment(&ExperimentConfig::new(learners("cams"), Some(30), 3, 11), &small_source(150)).unwrap();
        let b = run_experiment(&ExperimentConfig::new(learners("rs,cams"), Some(30), 3, 11), &small_source(150)).unwrap();
        assert_eq!(a.learners[0], b.learners[1]);
    }

    #[test]
    fn checkpoint_resume_matches_uninterrupted() {
        let cfg = ExperimentConfig::new(learners("cams,cams-max"), Some(40), 3, 8);
        let source = small_source(200);
        let full = run_experiment(&cfg, &source).unwrap();
        let ckpt = run_until(&cfg, &source, 77).unwrap();
        let ckpt = RunCheckpoint::from_json(&ckpt.to_json()).unwrap();
        assert_eq!(resume_experiment(&ckpt, &source).unwrap(), full);
    }

    #[test]
    fn checkpoint_rejects_baselines() {
        let cfg = ExperimentConfig::new(learners("cams,rs"), Some(40), 2, 8);
        assert!(run_until(&cfg, &small_source(50), 10).is_err());
    }

    #[test]
    fn sweep_zero_budget_and_full_information() {
        let cfg = ExperimentConfig::new(learners("cams"), None, 3, 4);
        let source = small_source(150);
        let table = budget_sweep(&cfg, &source, &[0, 150]).unwrap();
        let full = run_experiment(&cfg, &source).unwrap();
        assert_eq!(table.mean[1][0], full.learners[0].cumulative_loss.last_mean());
        let zero = run_experiment(&ExperimentConfig { budget: Some(0), ..cfg }, &source).unwrap();
        assert_eq!(table.mean[0][0], zero.learners[0].cumulative_loss.last_mean());
        assert!(zero.learners[0].final_queries.iter().all(|&q| q == 0.0));
    }
}
