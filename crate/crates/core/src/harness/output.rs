//! Report files. Every CSV has a `round` column followed by
//! `<learner>_mean`, `<learner>_lo`, `<learner>_hi` triples (the band
//! columns are absent when there is a single realization).

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::experiment::{ExperimentConfig, ExperimentReport, RealizationResult, SweepTable};
use super::metrics::Band;
use crate::domain::StreamMeta;
use crate::error::{Error, Result};
use crate::seed::derive_seed;

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Internal(format!("{}: {other:?}", path.display())),
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn write_bands(path: &Path, names: &[&str], bands: &[&Band]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["round".to_string()];
    for (name, band) in names.iter().zip(bands) {
        header.push(format!("{name}_mean"));
        if band.lo.is_some() {
            header.push(format!("{name}_lo"));
            header.push(format!("{name}_hi"));
        }
    }
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    let len = bands.first().map_or(0, |b| b.mean.len());
    for t in 0..len {
        let mut row = vec![(t + 1).to_string()];
        for band in bands {
            row.push(fmt(band.mean[t]));
            if let (Some(lo), Some(hi)) = (&band.lo, &band.hi) {
                row.push(fmt(lo[t]));
                row.push(fmt(hi[t]));
            }
        }
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `cumulative_loss.csv`, `queries.csv`, `rcl.csv`, `regret.csv`
/// (when the stream names a best policy) and `summary.csv` into `dir`.
pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<()> {
    let names: Vec<&str> = report.learners.iter().map(|l| l.name.as_str()).collect();
    let pick = |f: fn(&super::LearnerReport) -> &Band| report.learners.iter().map(f).collect::<Vec<_>>();
    write_bands(&dir.join("cumulative_loss.csv"), &names, &pick(|l| &l.cumulative_loss))?;
    write_bands(&dir.join("queries.csv"), &names, &pick(|l| &l.queries))?;
    write_bands(&dir.join("rcl.csv"), &names, &pick(|l| &l.rcl))?;
    if report.learners.iter().all(|l| l.regret.is_some()) {
        let regret: Vec<&Band> = report.learners.iter().filter_map(|l| l.regret.as_ref()).collect();
        write_bands(&dir.join("regret.csv"), &names, &regret)?;
    }

    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    w.write_record(["learner", "final_loss_mean", "final_loss_lo", "final_loss_hi", "queries_mean", "budget"])
        .map_err(|e| csv_err(&path, e))?;
    for l in &report.learners {
        let band = |b: &Option<Vec<f64>>| b.as_ref().and_then(|v| v.last()).map(|&x| fmt(x)).unwrap_or_default();
        w.write_record([
            l.name.clone(),
            fmt(l.cumulative_loss.last_mean()),
            band(&l.cumulative_loss.lo),
            band(&l.cumulative_loss.hi),
            fmt(l.queries.last_mean()),
            report.budget.to_string(),
        ])
        .map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

/// Long-format per-round trajectories of every learner and realization.
pub fn write_trajectories(path: &Path, names: &[String], results: &[RealizationResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record([
        "realization",
        "learner",
        "round",
        "chosen_model",
        "queried",
        "query_prob",
        "loss",
        "cumulative_loss",
        "cumulative_queries",
    ])
    .map_err(|e| csv_err(path, e))?;
    for (r, res) in results.iter().enumerate() {
        for (name, traj) in names.iter().zip(&res.trajectories) {
            for t in 0..traj.len() {
                w.write_record([
                    r.to_string(),
                    name.clone(),
                    (t + 1).to_string(),
                    traj.chosen_model[t].to_string(),
                    u8::from(traj.queried[t]).to_string(),
                    fmt(traj.query_prob[t]),
                    traj.learner_loss[t].to_string(),
                    traj.cumulative_loss[t].to_string(),
                    traj.cumulative_queries[t].to_string(),
                ])
                .map_err(|e| csv_err(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `sweep.csv`: one row per budget with final-loss mean and band per learner.
pub fn write_sweep(dir: &Path, table: &SweepTable) -> Result<()> {
    let path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    let mut header = vec!["budget".to_string()];
    for name in &table.learners {
        header.extend([format!("{name}_mean"), format!("{name}_lo"), format!("{name}_hi")]);
    }
    w.write_record(&header).map_err(|e| csv_err(&path, e))?;
    for (b, budget) in table.budgets.iter().enumerate() {
        let mut row = vec![budget.to_string()];
        for l in 0..table.learners.len() {
            row.push(fmt(table.mean[b][l]));
            row.push(table.lo[b][l].map(fmt).unwrap_or_default());
            row.push(table.hi[b][l].map(fmt).unwrap_or_default());
        }
        w.write_record(&row).map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationSeeds {
    pub realization: usize,
    /// Seed of the stream draw (synthetic sources) or of the shuffle (fixed stochastic streams).
    pub stream: u64,
    pub learners: BTreeMap<String, u64>,
}

/// Everything needed to replay a run: the configuration echo and every derived seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub stream_source: String,
    pub stream: StreamMeta,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<usize>>,
    pub seeds: Vec<RealizationSeeds>,
}

impl Manifest {
    pub fn new(
        command: &str,
        stream_source: String,
        synthetic: bool,
        stream: StreamMeta,
        config: &ExperimentConfig,
        budgets: Option<Vec<usize>>,
    ) -> Self {
        let tag = if synthetic { "stream" } else { "order" };
        let seeds = (0..config.realizations)
            .map(|r| RealizationSeeds {
                realization: r,
                stream: derive_seed(config.seed, r as u64, tag),
                learners: config
                    .learners
                    .iter()
                    .map(|l| (l.name.clone(), config.learner_seed(r, &l.name)))
                    .collect(),
            })
            .collect();
        Self {
            tool: "cams-bench",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            stream_source,
            stream,
            config: config.clone(),
            budgets,
            seeds,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}
