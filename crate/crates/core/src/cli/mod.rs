//! `cams-bench`: generation, execution and reporting.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 output conflict,
//! 4 internal invariant violation.

mod args;
mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;

pub use args::{Cli, Command, CompareArgs, ExperimentArgs, FileConfig, GenArgs, ReportArgs, RunArgs};
pub use report::{write_plot_data, PANELS};

use crate::datagen::{self, presets, SyntheticSpec};
use crate::error::Error;
use crate::harness::{
    budget_sweep, effective_budget, resume_realizations, run_realizations, run_until, write_report, write_sweep,
    write_trajectories, ExperimentConfig, ExperimentReport, LearnerSpec, Manifest, RunCheckpoint, StreamSource,
    DEFAULT_REALIZATIONS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFLICT: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

pub const THREADS_ENV: &str = "CAMS_BENCH_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Conflict(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Conflict(_) => EXIT_CONFLICT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Conflict(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(_) => CliError::Internal(e.to_string()),
            // unreadable inputs are the caller's problem; output failures are mapped explicitly
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn output_err(e: Error) -> CliError {
    CliError::Internal(e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}: expected a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => {
            let pool = thread_pool()?;
            pool.install(|| cmd_run(a))
        }
        Command::Compare(a) => {
            let pool = thread_pool()?;
            pool.install(|| cmd_compare(a))
        }
        Command::Report(a) => cmd_report(a),
    }
}

/// Refuses to write into an existing non-empty directory unless forced.
fn prepare_out_dir(dir: &Path, force: bool) -> CliResult<()> {
    if dir.exists() {
        if !dir.is_dir() {
            return Err(CliError::Conflict(format!("{} exists and is not a directory", dir.display())));
        }
        let non_empty = std::fs::read_dir(dir)
            .map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?
            .next()
            .is_some();
        if non_empty && !force {
            return Err(CliError::Conflict(format!(
                "{} already exists; pass --force to overwrite",
                dir.display()
            )));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))
}

fn load_spec(spec: Option<&Path>, preset: Option<&str>) -> CliResult<SyntheticSpec> {
    match (spec, preset) {
        (Some(_), Some(_)) => Err(CliError::Usage("spec and preset are mutually exclusive".into())),
        (Some(path), None) => Ok(SyntheticSpec::from_path(path)?),
        (None, Some(name)) => preset_spec(name),
        (None, None) => Err(CliError::Usage("one of --spec or --preset is required".into())),
    }
}

fn preset_spec(name: &str) -> CliResult<SyntheticSpec> {
    presets::preset(name).ok_or_else(|| {
        CliError::Usage(format!(
            "preset: unknown preset `{name}`; available: {}",
            presets::PRESET_NAMES.join(", ")
        ))
    })
}

fn cmd_gen(a: GenArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let spec_path = a.spec.or(file.spec);
    let preset = a.preset.or(file.preset);
    let out = a
        .out
        .or(file.out)
        .ok_or_else(|| CliError::Usage("out: an output path is required".into()))?;
    let force = a.force || file.force.unwrap_or(false);
    let spec = load_spec(spec_path.as_deref(), preset.as_deref())?;
    let seed = a.seed.or(file.seed).or(spec.seed).unwrap_or(0);
    if out.exists() && !force {
        return Err(CliError::Conflict(format!("{} already exists; pass --force to overwrite", out.display())));
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Internal(format!("{}: {e}", parent.display())))?;
    }
    let stream = datagen::generate(&spec, seed)?;
    datagen::save_stream(&stream, &out).map_err(output_err)?;

    let m = &stream.meta;
    let opt = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v}"));
    println!("wrote {} ({} rounds, seed {seed})", out.display(), m.horizon);
    println!("c={} k={} n={} regime={}", m.c, m.k, m.n, format!("{:?}", m.regime).to_lowercase());
    println!(
        "best_policy={} delta={} gamma={}",
        m.best_policy_index.map_or("none".to_string(), |i| i.to_string()),
        opt(m.gap_delta),
        opt(m.gap_gamma)
    );
    Ok(())
}

/// Resolved experiment settings shared by `run` and `compare`.
struct Experiment {
    config: ExperimentConfig,
    source: StreamSource,
    source_label: String,
    out: PathBuf,
    force: bool,
}

fn resolve_experiment(a: ExperimentArgs, file: &FileConfig) -> CliResult<Experiment> {
    let learners = a
        .learners
        .or_else(|| file.learners.as_ref().map(|l| l.joined()))
        .ok_or_else(|| CliError::Usage("learners: at least one learner is required".into()))?;
    let learners = LearnerSpec::parse_list(&learners)?;
    let out = a
        .out
        .or_else(|| file.out.clone())
        .ok_or_else(|| CliError::Usage("out: an output directory is required".into()))?;
    let mut config = ExperimentConfig::new(
        learners,
        a.budget.or(file.budget),
        a.realizations.or(file.realizations).unwrap_or(DEFAULT_REALIZATIONS),
        a.seed.or(file.seed).unwrap_or(0),
    );
    config.rounds = a.rounds.or(file.rounds);
    config.scale_early = a.scale_early || file.scale_early.unwrap_or(false);
    config.validate()?;

    let stream = a.stream.or_else(|| file.stream.clone());
    let preset = a.preset.or_else(|| file.preset.clone());
    let (source, source_label) = match (stream, preset) {
        (Some(_), Some(_)) => return Err(CliError::Usage("stream and preset are mutually exclusive".into())),
        (Some(path), None) => (
            StreamSource::Fixed(datagen::load_stream(&path)?),
            format!("file:{}", path.display()),
        ),
        (None, Some(name)) => (StreamSource::synthetic(preset_spec(&name)?)?, format!("preset:{name}")),
        (None, None) => return Err(CliError::Usage("one of --stream or --preset is required".into())),
    };
    let horizon = source.meta()?.horizon;
    if let Some(r) = config.rounds {
        if r == 0 || r > horizon {
            return Err(CliError::Usage(format!("rounds: {r} outside 1..={horizon}")));
        }
    }
    if config.scale_early && config.rounds.unwrap_or(horizon) < 10 {
        return Err(CliError::Usage("scale-early: needs at least 10 rounds".into()));
    }
    Ok(Experiment {
        config,
        source,
        source_label,
        out,
        force: a.force || file.force.unwrap_or(false),
    })
}

fn print_summary(report: &ExperimentReport) {
    println!(
        "T={} R={} budget={}",
        report.horizon, report.realizations, report.budget
    );
    for l in &report.learners {
        println!(
            "{:<22} final_loss {:>10.2} queries {:>10.2}",
            l.name,
            l.cumulative_loss.last_mean(),
            l.queries.last_mean()
        );
    }
}

fn cmd_run(a: RunArgs) -> CliResult<()> {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let stop_after = a.stop_after.or(file.stop_after);
    let resume = a.resume.clone().or_else(|| file.resume.clone());
    if stop_after.is_some() && resume.is_some() {
        return Err(CliError::Usage("stop-after and resume are mutually exclusive".into()));
    }
    let exp = resolve_experiment(a.common, &file)?;
    let checkpoint = match &resume {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let ckpt = RunCheckpoint::from_json(&text)?;
            if ckpt.config != exp.config {
                return Err(CliError::Usage(format!(
                    "resume: {} was written with a different configuration",
                    path.display()
                )));
            }
            Some(ckpt)
        }
        None => None,
    };
    if let Some(s) = stop_after {
        if s == 0 {
            return Err(CliError::Usage("stop-after: must be at least 1".into()));
        }
        if let Some(l) = exp.config.learners.iter().find(|l| !l.is_cams()) {
            return Err(CliError::Usage(format!(
                "stop-after: learner `{}` cannot be checkpointed (CAMS learners only)",
                l.name
            )));
        }
    }
    prepare_out_dir(&exp.out, exp.force)?;

    if let Some(s) = stop_after {
        let ckpt = run_until(&exp.config, &exp.source, s)?;
        let path = exp.out.join("checkpoint.json");
        std::fs::write(&path, ckpt.to_json() + "\n").map_err(|e| output_err(Error::io(&path, e)))?;
        println!("checkpoint after {s} rounds written to {}", path.display());
        return Ok(());
    }

    let results = match &checkpoint {
        Some(ckpt) => resume_realizations(ckpt, &exp.source)?,
        None => run_realizations(&exp.config, &exp.source)?,
    };
    let budget = effective_budget(&exp.config, &exp.source)?;
    let report = ExperimentReport::aggregate(&exp.config, budget, &results);
    let names: Vec<String> = exp.config.learners.iter().map(|l| l.name.clone()).collect();
    write_trajectories(&exp.out.join("trajectories.csv"), &names, &results).map_err(output_err)?;
    write_report(&exp.out, &report).map_err(output_err)?;
    write_manifest("run", &exp, None)?;
    print_summary(&report);
    Ok(())
}

fn write_manifest(command: &str, exp: &Experiment, budgets: Option<Vec<usize>>) -> CliResult<()> {
    let mut meta = exp.source.meta()?;
    if let Some(r) = exp.config.rounds {
        meta.horizon = r;
    }
    let synthetic = matches!(exp.source, StreamSource::Synthetic { .. });
    Manifest::new(command, exp.source_label.clone(), synthetic, meta, &exp.config, budgets)
        .write(&exp.out)
        .map_err(output_err)
}

/// Default sweep: fractions of the stream length, deduplicated.
pub fn default_budgets(horizon: usize) -> Vec<usize> {
    let mut b: Vec<usize> = [100, 20, 10, 4, 2, 1].iter().map(|d| (horizon / d).max(1)).collect();
    b.dedup();
    b
}

fn parse_budgets(text: &str) -> CliResult<Vec<usize>> {
    let budgets = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| CliError::Usage(format!("budgets: `{s}` is not a non-negative integer")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if budgets.is_empty() {
        return Err(CliError::Usage("budgets: at least one budget is required".into()));
    }
    Ok(budgets)
}

fn cmd_compare(a: CompareArgs) -> CliResult<()> {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let budgets = match (&a.budgets, &file.budgets) {
        (Some(text), _) => Some(parse_budgets(text)?),
        (None, Some(list)) if list.is_empty() => {
            return Err(CliError::Usage("budgets: at least one budget is required".into()))
        }
        (None, list) => list.clone(),
    };
    let exp = resolve_experiment(a.common, &file)?;
    let horizon = exp.config.rounds.unwrap_or(exp.source.meta()?.horizon);
    let budgets = budgets.unwrap_or_else(|| default_budgets(horizon));
    prepare_out_dir(&exp.out, exp.force)?;

    let results = run_realizations(&exp.config, &exp.source)?;
    let budget = effective_budget(&exp.config, &exp.source)?;
    let report = ExperimentReport::aggregate(&exp.config, budget, &results);
    let sweep = budget_sweep(&exp.config, &exp.source, &budgets)?;
    write_report(&exp.out, &report).map_err(output_err)?;
    write_sweep(&exp.out, &sweep).map_err(output_err)?;
    write_manifest("compare", &exp, Some(budgets))?;
    print_summary(&report);
    Ok(())
}

fn cmd_report(a: ReportArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let input = a
        .input
        .or(file.input)
        .ok_or_else(|| CliError::Usage("input: a report directory is required".into()))?;
    if !input.is_dir() {
        return Err(CliError::Usage(format!("input: {} is not a directory", input.display())));
    }
    let out = a.out.or(file.out).unwrap_or_else(|| input.join("plots"));
    let force = a.force || file.force.unwrap_or(false);
    let svg = !(a.no_svg || file.no_svg.unwrap_or(false));
    prepare_out_dir(&out, force)?;
    let written = write_plot_data(&input, &out, svg)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
