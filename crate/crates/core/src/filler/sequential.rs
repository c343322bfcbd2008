//! Successive single-token masks filled left to right by beam search.

use std::cmp::Ordering;

use super::span::{parse_candidates, request_body};
use super::{clamp_monotone, FillCandidate, FillError, FillRequest, MaskFiller, Transport};
use crate::par::{self, Execution};
use crate::templates::MaskedCandidate;

#[derive(Debug, Clone)]
struct Hypothesis {
    tokens: Vec<String>,
    score: f64,
}

fn by_score_desc(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal)
}

/// Context with the template mask replaced by the chosen tokens followed
/// by `remaining` fresh masks.
fn expand(request: &FillRequest, tokens: &[String], remaining: usize) -> String {
    let mut filler = tokens.concat();
    for _ in 0..remaining {
        filler.push_str(&request.mask_token);
    }
    request.context_text.replacen(&request.mask_token, &filler, 1)
}

/// One beam step: every hypothesis asks the backend for its next token.
fn step(
    request: &FillRequest,
    transport: &dyn Transport,
    hyps: &[Hypothesis],
    remaining: usize,
) -> Result<Vec<Hypothesis>, FillError> {
    let replies = par::map(Execution::default(), hyps, |h| {
        let body = request_body(&expand(request, &h.tokens, remaining), &request.mask_token, remaining, request.beam_size);
        transport.post(&body).and_then(|reply| parse_candidates(&reply, None))
    });
    let mut next = Vec::new();
    for (h, reply) in hyps.iter().zip(replies) {
        for (rank, (fills, score)) in reply?.into_iter().enumerate() {
            let mut tokens = h.tokens.clone();
            tokens.push(fills[0].clone());
            next.push(Hypothesis {
                tokens,
                score: h.score + score.unwrap_or(-(rank as f64 + 1.0)),
            });
        }
    }
    next.sort_by(by_score_desc);
    next.truncate(request.beam_size);
    Ok(next)
}

/// Beam search over `k` successive masks for every `k` in `range`, merged
/// by joint score (sum of per-token log-scores). Fills are the chosen
/// tokens concatenated; equal strings keep their best score.
pub fn sequential_fill(
    request: &FillRequest,
    transport: &dyn Transport,
    range: (usize, usize),
    backend: &str,
) -> Result<Vec<FillCandidate>, FillError> {
    request.require_single_mask()?;
    let (low, high) = range;
    let mut finished: Vec<Hypothesis> = Vec::new();
    for k in low.max(1)..=high {
        let mut hyps = vec![Hypothesis {
            tokens: Vec::new(),
            score: 0.0,
        }];
        for i in 0..k {
            hyps = step(request, transport, &hyps, k - i)?;
            if hyps.is_empty() {
                break;
            }
        }
        finished.extend(hyps.into_iter().filter(|h| h.tokens.len() == k));
    }
    finished.sort_by(by_score_desc);
    let mut out: Vec<FillCandidate> = Vec::new();
    for h in finished {
        let fill = h.tokens.concat().trim().to_string();
        if out.iter().any(|c| c.fills[0] == fill) {
            continue;
        }
        out.push(FillCandidate {
            fills: vec![fill],
            score: h.score,
            backend: backend.to_string(),
        });
        if out.len() == request.beam_size {
            break;
        }
    }
    clamp_monotone(&mut out);
    Ok(out)
}

pub struct SequentialFiller {
    transport: Box<dyn Transport>,
    range: (usize, usize),
}

impl SequentialFiller {
    pub fn new(transport: Box<dyn Transport>, range: (usize, usize)) -> Self {
        SequentialFiller { transport, range }
    }
}

impl MaskFiller for SequentialFiller {
    fn name(&self) -> &str {
        "sequential"
    }

    fn fill(&self, request: &FillRequest, _candidate: &MaskedCandidate) -> Result<Vec<FillCandidate>, FillError> {
        sequential_fill(request, self.transport.as_ref(), self.range, self.name())
    }
}
