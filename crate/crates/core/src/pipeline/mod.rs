//! Candidate generation, patch validation and the repair loop.

mod diff;
mod generate;
mod repair;
mod validate;

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::Language;
use crate::templates::TemplateId;

pub use diff::{apply_diff, unified_diff};
pub use generate::{generate, GenEvent, Generator};
pub use repair::{make_filler, repair, repair_with, HaltReason, RepairOptions};
pub use validate::{parse_failing_tests, validate, ValidateError, Validator};

/// One repair task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugInstance {
    pub id: String,
    /// Directory copied into each validation workdir.
    pub project_root: PathBuf,
    /// Buggy file; must live under `project_root`.
    pub source_file: PathBuf,
    pub buggy_lines: Vec<usize>,
    pub build_command: String,
    pub test_command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_patch: Option<PathBuf>,
    #[serde(default)]
    pub language: Language,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BugError {
    #[error("bug `{0}` has no buggy lines")]
    NoBuggyLines(String),
    #[error("bug `{id}`: line {line} is outside the file ({lines} lines)")]
    LineOutOfRange { id: String, line: usize, lines: usize },
    #[error("bug `{0}` has an empty build or test command")]
    EmptyCommand(String),
    #[error("bug `{id}`: {path} is not inside the project root")]
    OutsideProject { id: String, path: PathBuf },
}

impl BugInstance {
    /// `source_file` relative to `project_root`.
    pub fn relative_source(&self) -> Result<&Path, BugError> {
        self.source_file
            .strip_prefix(&self.project_root)
            .map_err(|_| BugError::OutsideProject {
                id: self.id.clone(),
                path: self.source_file.clone(),
            })
    }

    pub fn check(&self, line_count: usize) -> Result<(), BugError> {
        if self.buggy_lines.is_empty() {
            return Err(BugError::NoBuggyLines(self.id.clone()));
        }
        if let Some(&line) = self.buggy_lines.iter().find(|&&l| l == 0 || l > line_count) {
            return Err(BugError::LineOutOfRange {
                id: self.id.clone(),
                line,
                lines: line_count,
            });
        }
        if self.build_command.trim().is_empty() || self.test_command.trim().is_empty() {
            return Err(BugError::EmptyCommand(self.id.clone()));
        }
        self.relative_source()?;
        Ok(())
    }
}

/// Where a patch came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Origin {
    pub template: TemplateId,
    pub backend: String,
    /// 1-based rank of the fill; absent for complete candidates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill_rank: Option<usize>,
    pub anchor_line: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchCandidate {
    pub patched_source: String,
    pub diff: String,
    pub origin: Origin,
    pub score: f64,
    pub global_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum ValidationOutcome {
    CompileError {
        log: String,
    },
    TestsFailed {
        failing_tests: Vec<String>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        timed_out: bool,
    },
    Plausible,
    ReferenceEquivalent,
}

impl ValidationOutcome {
    pub fn is_plausible(&self) -> bool {
        matches!(self, ValidationOutcome::Plausible | ValidationOutcome::ReferenceEquivalent)
    }

    pub fn compiled(&self) -> bool {
        !matches!(self, ValidationOutcome::CompileError { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunBudget {
    pub beam_size: usize,
    pub wall_clock_limit_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_candidates: Option<usize>,
    pub stop_on_first_plausible: bool,
    /// Concurrent validations; 0 means one per available core.
    pub validation_workers: usize,
    /// Limit on each build or test command.
    pub command_timeout_secs: f64,
}

impl Default for RunBudget {
    fn default() -> Self {
        RunBudget {
            beam_size: 250,
            wall_clock_limit_secs: 18_000.0,
            max_candidates: None,
            stop_on_first_plausible: true,
            validation_workers: 0,
            command_timeout_secs: 300.0,
        }
    }
}

impl RunBudget {
    pub fn wall_clock_limit(&self) -> Duration {
        Duration::from_secs_f64(self.wall_clock_limit_secs.max(0.0))
    }

    pub fn command_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.command_timeout_secs.max(0.001))
    }

    pub fn workers(&self) -> usize {
        match self.validation_workers {
            0 => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            n => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub global_rank: usize,
    pub origin: Origin,
    pub score: f64,
    pub diff: String,
    #[serde(flatten)]
    pub outcome: ValidationOutcome,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// Candidates taken from the generation stream.
    pub generated: usize,
    pub validated: usize,
    pub compiled: usize,
    pub plausible: usize,
    pub reference_equivalent: usize,
    pub filler_errors: usize,
}

/// Settings a report was produced under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub backend: String,
    pub endpoint: Option<String>,
    pub budget: RunBudget,
    pub template_order: Vec<TemplateId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_filter: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub bug_id: String,
    pub header: ReportHeader,
    pub candidates: Vec<CandidateRecord>,
    pub counts: Counts,
    pub halted_by: HaltReason,
    /// Plausible but not reference-equivalent; needs a human look.
    pub needs_review: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup_error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transcripts: Vec<PathBuf>,
    pub elapsed_secs: f64,
}

impl RepairReport {
    pub fn first_plausible(&self) -> Option<&CandidateRecord> {
        self.candidates.iter().find(|c| c.outcome.is_plausible())
    }

    pub fn has_reference_equivalent(&self) -> bool {
        self.counts.reference_equivalent > 0
    }

    /// Exit status: 0 plausible found, 1 none found, 2 setup error.
    pub fn exit_code(&self) -> i32 {
        if self.setup_error.is_some() {
            2
        } else if self.counts.plausible > 0 {
            0
        } else {
            1
        }
    }

    pub(crate) fn tally(&mut self) {
        let c = &mut self.counts;
        c.validated = self.candidates.len();
        c.compiled = self.candidates.iter().filter(|r| r.outcome.compiled()).count();
        c.plausible = self.candidates.iter().filter(|r| r.outcome.is_plausible()).count();
        c.reference_equivalent = self
            .candidates
            .iter()
            .filter(|r| r.outcome == ValidationOutcome::ReferenceEquivalent)
            .count();
        self.needs_review = self
            .candidates
            .iter()
            .filter(|r| r.outcome == ValidationOutcome::Plausible)
            .map(|r| r.global_rank)
            .collect();
    }
}
