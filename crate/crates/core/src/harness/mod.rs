//! Experiment execution: realizations, aggregation across them, budget
//! sweeps and report files.

mod experiment;
mod learners;
mod metrics;
mod output;
mod realization;

pub use experiment::{
    budget_sweep, effective_budget, policy_follow_series, resume_experiment, resume_realizations, run_experiment,
    run_realizations, run_until, ExperimentConfig,
    ExperimentReport, LearnerCheckpoint, LearnerReport, RealizationCheckpoint, RealizationResult, RunCheckpoint,
    StreamSource, SweepTable, CHECKPOINT_SCHEMA, DEFAULT_REALIZATIONS,
};
pub use learners::{AnyLearner, BaselineKindTag, LearnerKind, LearnerSpec, LEARNER_NAMES};
pub use metrics::{
    best_model_series, model_cumulative_losses, quantile, relative_cumulative_loss, scaling_parameter, Band,
    BAND_HI, BAND_LO,
};
pub use output::{write_report, write_sweep, write_trajectories, Manifest, RealizationSeeds};
pub use realization::{early_phase_end, run_realization, run_rounds, Trajectory};
