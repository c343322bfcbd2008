//! Batch runs over a manifest, with per-bug reports and aggregate metrics.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use super::manifest::BenchmarkManifest;
use crate::filler::FillerConfig;
use crate::pipeline::{repair, HaltReason, RepairOptions, RepairReport, RunBudget};
use crate::templates::{TemplateFilter, TemplateOrder};

pub const METRICS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot read previous report {path}: {reason}")]
    BadReport { path: PathBuf, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BugOutcome {
    ReferenceEquivalent,
    Plausible,
    NotFixed,
    SetupError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugSummary {
    pub id: String,
    pub outcome: BugOutcome,
    pub expressible: bool,
    pub halted_by: HaltReason,
    pub candidates_validated: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_plausible_rank: Option<usize>,
}

impl BugSummary {
    pub fn from_report(report: &RepairReport, expressible: bool) -> Self {
        let outcome = if report.setup_error.is_some() {
            BugOutcome::SetupError
        } else if report.has_reference_equivalent() {
            BugOutcome::ReferenceEquivalent
        } else if report.counts.plausible > 0 {
            BugOutcome::Plausible
        } else {
            BugOutcome::NotFixed
        };
        BugSummary {
            id: report.bug_id.clone(),
            outcome,
            expressible,
            halted_by: report.halted_by,
            candidates_validated: report.counts.validated,
            first_plausible_rank: report.first_plausible().map(|c| c.global_rank),
        }
    }
}

/// Reference-equivalent share of plausible bugs; serialized as "–" when
/// nothing was plausible.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(from = "serde_json::Value")]
pub struct Precision(pub Option<f64>);

impl From<serde_json::Value> for Precision {
    fn from(v: serde_json::Value) -> Self {
        Precision(v.as_f64())
    }
}

impl Serialize for Precision {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(p) => s.serialize_f64(p),
            None => s.serialize_str("–"),
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            Some(p) => write!(f, "{:.2}%", p * 100.0),
            None => f.write_str("–"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub attempted: usize,
    pub plausible: usize,
    pub reference_equivalent: usize,
    pub precision: Precision,
    pub mean_candidates_validated: f64,
    pub setup_errors: usize,
    pub expressible: usize,
    pub expressible_reference_equivalent: usize,
}

impl Aggregate {
    pub fn from_bugs(bugs: &[BugSummary]) -> Self {
        let count = |f: &dyn Fn(&BugSummary) -> bool| bugs.iter().filter(|b| f(b)).count();
        let reference_equivalent = count(&|b| b.outcome == BugOutcome::ReferenceEquivalent);
        let plausible = reference_equivalent + count(&|b| b.outcome == BugOutcome::Plausible);
        let validated: usize = bugs.iter().map(|b| b.candidates_validated).sum();
        Aggregate {
            attempted: bugs.len(),
            plausible,
            reference_equivalent,
            precision: Precision((plausible > 0).then(|| reference_equivalent as f64 / plausible as f64)),
            mean_candidates_validated: if bugs.is_empty() { 0.0 } else { validated as f64 / bugs.len() as f64 },
            setup_errors: count(&|b| b.outcome == BugOutcome::SetupError),
            expressible: count(&|b| b.expressible),
            expressible_reference_equivalent: count(&|b| b.expressible && b.outcome == BugOutcome::ReferenceEquivalent),
        }
    }
}

/// Settings echoed into the aggregate report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchHeader {
    pub manifest: String,
    pub backend: String,
    pub endpoint: Option<String>,
    pub budget: RunBudget,
    pub template_order: Vec<crate::templates::TemplateId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_filter: Option<String>,
}

/// Run-dependent values kept apart so reports of identical runs compare equal
/// once this block is dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_wall_secs: f64,
    pub resumed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub header: BenchHeader,
    pub bugs: Vec<BugSummary>,
    pub aggregate: Aggregate,
    pub timing: Timing,
}

impl MetricsReport {
    /// Serialized report without the timing block.
    pub fn stable_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("timing");
        }
        serde_json::to_string_pretty(&value).expect("report serializes")
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    pub filler: FillerConfig,
    pub order: TemplateOrder,
    pub filter: Option<TemplateFilter>,
    /// Repeat bugs that already have a report in the output directory.
    pub rerun: bool,
}

pub fn bug_report_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join("bugs").join(format!("{id}.json"))
}

pub fn metrics_path(out_dir: &Path) -> PathBuf {
    out_dir.join("metrics.json")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BenchError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    // Write then rename so an interrupted run never leaves a truncated report.
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn read_report(path: &Path) -> Result<RepairReport, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::BadReport {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| BenchError::BadReport {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Repairs every bug in turn, writing `bugs/<id>.json` after each and
/// `metrics.json` at the end.
pub fn run_bench(
    manifest: &BenchmarkManifest,
    budget: &RunBudget,
    options: &BenchOptions,
    out_dir: &Path,
) -> Result<MetricsReport, BenchError> {
    let start = Instant::now();
    let bugs_dir = out_dir.join("bugs");
    fs::create_dir_all(&bugs_dir).map_err(io_err(&bugs_dir))?;

    let mut summaries = Vec::with_capacity(manifest.bugs.len());
    let mut resumed = Vec::new();
    for entry in &manifest.bugs {
        let path = bug_report_path(out_dir, &entry.bug.id);
        let report = if !options.rerun && path.exists() {
            tracing::info!(bug = %entry.bug.id, "already reported, skipping");
            resumed.push(entry.bug.id.clone());
            read_report(&path)?
        } else {
            tracing::info!(bug = %entry.bug.id, "repairing");
            let repair_options = RepairOptions {
                filler: options.filler.clone(),
                order: options.order.clone(),
                filter: options.filter,
                transcript_dir: Some(out_dir.join("transcripts").join(&entry.bug.id)),
            };
            let report = repair(&entry.bug, budget, &repair_options);
            write_json(&path, &report)?;
            report
        };
        summaries.push(BugSummary::from_report(&report, entry.expressible));
    }

    let report = MetricsReport {
        schema_version: METRICS_SCHEMA_VERSION,
        header: BenchHeader {
            manifest: manifest.name.clone(),
            backend: options.filler.backend.to_string(),
            endpoint: options.filler.endpoint.clone().filter(|_| options.filler.backend.is_remote()),
            budget: budget.clone(),
            template_order: options.order.ids().to_vec(),
            template_filter: options.filter.map(|f| f.to_string()),
        },
        aggregate: Aggregate::from_bugs(&summaries),
        bugs: summaries,
        timing: Timing {
            total_wall_secs: start.elapsed().as_secs_f64(),
            resumed,
        },
    };
    write_json(&metrics_path(out_dir), &report)?;
    Ok(report)
}
