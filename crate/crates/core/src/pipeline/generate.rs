//! Lazy patch stream: template instantiations, filled in order.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use super::diff::unified_diff;
use super::{Origin, PatchCandidate};
use crate::ast::ParsedUnit;
use crate::filler::{build_context, FillRequest, MaskFiller};
use crate::par::Execution;
use crate::templates::{mask_lines, MaskedCandidate, TemplateFilter, TemplateId, TemplateOrder};

#[derive(Debug, Clone, PartialEq)]
pub enum GenEvent {
    Candidate(PatchCandidate),
    /// A filler call failed; only that masked candidate is skipped.
    FillerError { template: TemplateId, error: String },
}

/// Produces patches ordered by (template order, site, fill rank), dropping
/// duplicates and edits that leave the file unchanged.
pub struct Generator {
    unit: Arc<ParsedUnit>,
    filler: Arc<dyn MaskFiller>,
    beam_size: usize,
    masked: std::vec::IntoIter<MaskedCandidate>,
    pending: VecDeque<GenEvent>,
    seen: HashSet<String>,
    next_rank: usize,
    errors: Vec<(TemplateId, String)>,
}

impl Generator {
    pub fn new(
        unit: Arc<ParsedUnit>,
        buggy_lines: &[usize],
        order: &TemplateOrder,
        filter: Option<TemplateFilter>,
        filler: Arc<dyn MaskFiller>,
        beam_size: usize,
    ) -> Self {
        let masked: Vec<MaskedCandidate> = mask_lines(&unit, buggy_lines, order, filter, Execution::default())
            .into_iter()
            .filter_map(|(_, r)| r.ok())
            .flatten()
            .collect();
        Generator {
            unit,
            filler,
            beam_size,
            masked: masked.into_iter(),
            pending: VecDeque::new(),
            seen: HashSet::new(),
            next_rank: 0,
            errors: Vec::new(),
        }
    }

    /// Filler failures seen so far.
    pub fn errors(&self) -> &[(TemplateId, String)] {
        &self.errors
    }

    fn admit(&mut self, patched: String, origin: Origin, score: f64) {
        if patched == self.unit.source() || !self.seen.insert(patched.clone()) {
            return;
        }
        self.next_rank += 1;
        self.pending.push_back(GenEvent::Candidate(PatchCandidate {
            diff: unified_diff(self.unit.source(), &patched),
            patched_source: patched,
            origin,
            score,
            global_rank: self.next_rank,
        }));
    }

    fn expand(&mut self, candidate: MaskedCandidate) {
        let origin = |backend: &str, fill_rank| Origin {
            template: candidate.template,
            backend: backend.to_string(),
            fill_rank,
            anchor_line: candidate.anchor_line,
        };
        if candidate.is_complete() {
            let o = origin("template", None);
            self.admit(candidate.patched_unit_text.clone(), o, 0.0);
            return;
        }
        let fills = build_context(&self.unit, &candidate).and_then(|context| {
            let request = FillRequest::new(context, &candidate, self.beam_size);
            self.filler.fill(&request, &candidate)
        });
        match fills {
            Ok(fills) => {
                for (rank, fill) in fills.into_iter().enumerate() {
                    if let Some(patched) = candidate.fill(&fill.fills) {
                        let o = origin(&fill.backend, Some(rank + 1));
                        self.admit(patched, o, fill.score);
                    }
                }
            }
            Err(e) => {
                tracing::debug!(template = %candidate.template, error = %e, "filler failed");
                self.errors.push((candidate.template, e.to_string()));
                self.pending.push_back(GenEvent::FillerError {
                    template: candidate.template,
                    error: e.to_string(),
                });
            }
        }
    }

    pub fn next_event(&mut self) -> Option<GenEvent> {
        loop {
            if let Some(ev) = self.pending.pop_front() {
                return Some(ev);
            }
            let candidate = self.masked.next()?;
            self.expand(candidate);
        }
    }
}

impl Iterator for Generator {
    type Item = PatchCandidate;

    fn next(&mut self) -> Option<PatchCandidate> {
        loop {
            match self.next_event()? {
                GenEvent::Candidate(c) => return Some(c),
                GenEvent::FillerError { .. } => continue,
            }
        }
    }
}

/// Patch stream for `buggy_lines` of `unit` under the default order.
pub fn generate(
    unit: Arc<ParsedUnit>,
    buggy_lines: &[usize],
    filler: Arc<dyn MaskFiller>,
    beam_size: usize,
) -> Generator {
    Generator::new(unit, buggy_lines, &TemplateOrder::default(), None, filler, beam_size)
}
