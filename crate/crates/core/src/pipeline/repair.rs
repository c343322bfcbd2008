//! The repair loop: generate, validate, stop on budget or first plausible.

use std::fs;
use std::path::PathBuf;
use std::sync::mpsc::{self, RecvTimeoutError};
use std::sync::Arc;
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::generate::{GenEvent, Generator};
use super::validate::Validator;
use super::{BugInstance, CandidateRecord, Counts, PatchCandidate, RepairReport, ReportHeader, RunBudget};
use crate::ast::{parse, ParsedUnit};
use crate::filler::{
    Backend, DonorFiller, FillError, FillerConfig, MaskFiller, OracleFiller, PromptFiller, SequentialFiller,
    SpanFiller, Transcript,
};
use crate::templates::{TemplateFilter, TemplateOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HaltReason {
    FirstPlausible,
    Exhausted,
    WallClock,
    MaxCandidates,
    SetupError,
}

#[derive(Debug, Clone, Default)]
pub struct RepairOptions {
    pub filler: FillerConfig,
    pub order: TemplateOrder,
    pub filter: Option<TemplateFilter>,
    /// Per-bug directory for filler traffic and build/test logs.
    pub transcript_dir: Option<PathBuf>,
}

/// Builds the configured backend for one bug.
pub fn make_filler(
    config: &FillerConfig,
    bug: &BugInstance,
    unit: &ParsedUnit,
    transcript: Transcript,
) -> Result<Arc<dyn MaskFiller>, FillError> {
    Ok(match config.backend {
        Backend::Donor => Arc::new(DonorFiller::new(unit)),
        Backend::Oracle => {
            let path = bug
                .reference_patch
                .as_ref()
                .ok_or_else(|| FillError::InvalidRequest("oracle filler needs a reference patch".into()))?;
            let reference = fs::read_to_string(path)
                .map_err(|e| FillError::InvalidRequest(format!("{}: {e}", path.display())))?;
            Arc::new(OracleFiller::new(reference))
        }
        Backend::Span => Arc::new(SpanFiller::new(Box::new(config.transport(transcript)?))),
        Backend::Sequential => Arc::new(SequentialFiller::new(
            Box::new(config.transport(transcript)?),
            config.mask_count_range,
        )),
        Backend::Prompt => Arc::new(PromptFiller::new(Box::new(config.transport(transcript)?))),
    })
}

struct Setup {
    unit: Arc<ParsedUnit>,
    validator: Validator,
    filler: Arc<dyn MaskFiller>,
    transcripts: Vec<PathBuf>,
}

fn setup(bug: &BugInstance, budget: &RunBudget, options: &RepairOptions, filler: Option<Arc<dyn MaskFiller>>) -> Result<Setup, String> {
    let source = fs::read(&bug.source_file).map_err(|e| format!("{}: {e}", bug.source_file.display()))?;
    let text = String::from_utf8(source).map_err(|e| format!("{}: {e}", bug.source_file.display()))?;
    let unit = parse(&text, bug.language).map_err(|e| e.to_string())?;
    bug.check(unit.line_count()).map_err(|e| e.to_string())?;

    let mut transcripts = Vec::new();
    let (transcript, log_dir) = match &options.transcript_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            let path = dir.join("filler.jsonl");
            let t = Transcript::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            transcripts.push(path);
            let logs = dir.join("validation");
            transcripts.push(logs.clone());
            (t, Some(logs))
        }
        None => (Transcript::disabled(), None),
    };
    let validator = Validator::new(bug, budget.command_timeout(), log_dir).map_err(|e| e.to_string())?;
    let filler = match filler {
        Some(f) => f,
        None => make_filler(&options.filler, bug, &unit, transcript).map_err(|e| e.to_string())?,
    };
    Ok(Setup {
        unit: Arc::new(unit),
        validator,
        filler,
        transcripts,
    })
}

/// Runs one bug with the backend described by `options.filler`.
pub fn repair(bug: &BugInstance, budget: &RunBudget, options: &RepairOptions) -> RepairReport {
    repair_inner(bug, budget, options, None)
}

/// Same as [`repair`] with a caller-supplied backend.
pub fn repair_with(bug: &BugInstance, budget: &RunBudget, options: &RepairOptions, filler: Arc<dyn MaskFiller>) -> RepairReport {
    repair_inner(bug, budget, options, Some(filler))
}

fn repair_inner(
    bug: &BugInstance,
    budget: &RunBudget,
    options: &RepairOptions,
    filler: Option<Arc<dyn MaskFiller>>,
) -> RepairReport {
    let start = Instant::now();
    let deadline = start + budget.wall_clock_limit();
    let mut report = RepairReport {
        bug_id: bug.id.clone(),
        header: ReportHeader {
            backend: filler
                .as_ref()
                .map(|f| f.name().to_string())
                .unwrap_or_else(|| options.filler.backend.to_string()),
            endpoint: options.filler.endpoint.clone().filter(|_| options.filler.backend.is_remote()),
            budget: budget.clone(),
            template_order: options.order.ids().to_vec(),
            template_filter: options.filter.map(|f| f.to_string()),
        },
        candidates: Vec::new(),
        counts: Counts::default(),
        halted_by: HaltReason::SetupError,
        needs_review: Vec::new(),
        setup_error: None,
        transcripts: Vec::new(),
        elapsed_secs: 0.0,
    };

    let setup = match setup(bug, budget, options, filler) {
        Ok(s) => s,
        Err(e) => {
            tracing::error!(bug = %bug.id, error = %e, "setup failed");
            report.setup_error = Some(e);
            report.elapsed_secs = start.elapsed().as_secs_f64();
            return report;
        }
    };
    report.transcripts = setup.transcripts.clone();

    let workers = budget.workers().max(1);
    let (tx, rx) = mpsc::sync_channel::<GenEvent>(workers);
    {
        let unit = Arc::clone(&setup.unit);
        let filler = Arc::clone(&setup.filler);
        let lines = bug.buggy_lines.clone();
        let order = options.order.clone();
        let filter = options.filter;
        let beam = budget.beam_size;
        // Detached: a stalled filler must not hold up the budget check.
        thread::Builder::new()
            .name("maskfix-generate".into())
            .spawn(move || {
                let mut generator = Generator::new(unit, &lines, &order, filter, filler, beam);
                while let Some(event) = generator.next_event() {
                    if tx.send(event).is_err() {
                        return;
                    }
                }
            })
            .expect("spawn generator thread");
    }

    let max = budget.max_candidates.unwrap_or(usize::MAX);
    let halted = 'run: loop {
        let room = max.saturating_sub(report.candidates.len());
        if room == 0 {
            break 'run HaltReason::MaxCandidates;
        }
        let mut batch: Vec<PatchCandidate> = Vec::new();
        let mut exhausted = false;
        while batch.len() < workers.min(room) {
            let now = Instant::now();
            if now >= deadline {
                break 'run HaltReason::WallClock;
            }
            match rx.recv_timeout(deadline - now) {
                Ok(GenEvent::Candidate(c)) => {
                    report.counts.generated += 1;
                    batch.push(c);
                }
                Ok(GenEvent::FillerError { .. }) => report.counts.filler_errors += 1,
                Err(RecvTimeoutError::Timeout) => break 'run HaltReason::WallClock,
                Err(RecvTimeoutError::Disconnected) => {
                    exhausted = true;
                    break;
                }
            }
        }
        if batch.is_empty() {
            break 'run HaltReason::Exhausted;
        }

        let outcomes: Vec<_> = if batch.len() == 1 {
            vec![setup.validator.validate(&batch[0])]
        } else {
            thread::scope(|s| {
                let handles: Vec<_> = batch
                    .iter()
                    .map(|c| s.spawn(|| setup.validator.validate(c)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("validation thread")).collect()
            })
        };

        // Record in rank order up to the first plausible patch, so the
        // report matches a one-at-a-time run.
        for (candidate, outcome) in batch.into_iter().zip(outcomes) {
            let outcome = match outcome {
                Ok(o) => o,
                Err(e) => {
                    report.setup_error = Some(e.to_string());
                    break 'run HaltReason::SetupError;
                }
            };
            tracing::info!(bug = %bug.id, rank = candidate.global_rank, template = %candidate.origin.template, ?outcome, "validated");
            let plausible = outcome.is_plausible();
            report.candidates.push(CandidateRecord {
                global_rank: candidate.global_rank,
                origin: candidate.origin,
                score: candidate.score,
                diff: candidate.diff,
                outcome,
            });
            if plausible && budget.stop_on_first_plausible {
                break 'run HaltReason::FirstPlausible;
            }
        }
        if exhausted {
            break 'run HaltReason::Exhausted;
        }
        if Instant::now() >= deadline {
            break 'run HaltReason::WallClock;
        }
    };
    report.halted_by = halted;
    report.tally();
    report.elapsed_secs = start.elapsed().as_secs_f64();
    report
}
