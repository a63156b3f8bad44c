use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "cams-bench", version, about = "Online contextual active model selection benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic stream file from a spec or preset.
    Gen(GenArgs),
    /// Run learners on a stream and write per-round trajectories.
    Run(RunArgs),
    /// Compare learners at a fixed budget and across a budget sweep.
    Compare(CompareArgs),
    /// Turn a report directory into long-format plot data and SVG charts.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// TOML spec file.
    #[arg(long, conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    /// Built-in spec (standard, malicious, six-class, context-free, vertebral, adversarial).
    #[arg(long)]
    pub preset: Option<String>,
    /// Stream file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Generation seed; defaults to the spec's seed, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub force: bool,
    /// TOML file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Stream file to replay (reshuffled per realization when stochastic).
    #[arg(long, conflicts_with = "preset")]
    pub stream: Option<PathBuf>,
    /// Built-in spec; every realization draws a fresh stream.
    #[arg(long)]
    pub preset: Option<String>,
    /// Comma-separated learner names.
    #[arg(long, visible_alias = "learner")]
    pub learners: Option<String>,
    /// Label budget; defaults to the number of rounds.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Truncate every stream to its first N rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
    /// Rescale query probabilities after the first tenth of the stream to match the budget.
    #[arg(long)]
    pub scale_early: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    /// Stop every realization after N rounds and write `checkpoint.json` instead of reports.
    #[arg(long, conflicts_with = "resume")]
    pub stop_after: Option<usize>,
    /// Finish a run from a checkpoint written by `--stop-after`.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    /// Comma-separated budgets for the sweep; defaults to fractions of the stream length.
    #[arg(long)]
    pub budgets: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `run` or `compare`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Where to write plot data; defaults to `<input>/plots`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
    /// Skip the SVG charts.
    #[arg(long)]
    pub no_svg: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Learners may be given as a comma list or a TOML array.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NameList {
    Joined(String),
    List(Vec<String>),
}

impl NameList {
    pub fn joined(&self) -> String {
        match self {
            NameList::Joined(s) => s.clone(),
            NameList::List(v) => v.join(","),
        }
    }
}

/// Keys accepted in a `--config` file. Flags given on the command line win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub spec: Option<PathBuf>,
    pub preset: Option<String>,
    pub stream: Option<PathBuf>,
    pub learners: Option<NameList>,
    pub budget: Option<usize>,
    pub budgets: Option<Vec<usize>>,
    pub rounds: Option<usize>,
    pub realizations: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub force: Option<bool>,
    pub scale_early: Option<bool>,
    pub stop_after: Option<usize>,
    pub resume: Option<PathBuf>,
    pub no_svg: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
    }
}
