//! Single-mask span infilling over the remote wire protocol.

use serde_json::{json, Value};

use super::{clamp_monotone, FillCandidate, FillError, FillRequest, MaskFiller, Transport};
use crate::templates::MaskedCandidate;

const SENTINELS: &[&str] = &["</s>", "<|endoftext|>", "<|EOT|>", "<eos>", "<EOF>", "<eom>"];

/// Cuts a fill at the first end-of-fill marker.
pub fn strip_sentinels(fill: &str) -> &str {
    let cut = SENTINELS
        .iter()
        .filter_map(|s| fill.find(s))
        .min()
        .unwrap_or(fill.len());
    fill[..cut].trim()
}

pub(crate) fn request_body(context: &str, mask_token: &str, mask_count: usize, beam: usize) -> Value {
    json!({
        "context": context,
        "mask_token": mask_token,
        "mask_count": mask_count,
        "beam": beam,
    })
}

/// Fills of one reply entry and its score, if the backend sent one.
pub(crate) type RawCandidate = (Vec<String>, Option<f64>);

/// `(fills, score)` pairs of a `{"candidates": [...]}` reply, in reply
/// order. With `exact` set, entries with a different number of fills are
/// skipped; otherwise any non-empty list is kept.
pub(crate) fn parse_candidates(reply: &Value, exact: Option<usize>) -> Result<Vec<RawCandidate>, FillError> {
    let list = reply
        .get("candidates")
        .and_then(Value::as_array)
        .ok_or_else(|| FillError::MalformedResponse("missing `candidates` array".into()))?;
    let mut out = Vec::with_capacity(list.len());
    for item in list {
        let Some(fills) = item.get("fills").and_then(Value::as_array) else {
            tracing::warn!(?item, "candidate without `fills`");
            continue;
        };
        let fills: Option<Vec<String>> = fills.iter().map(|f| f.as_str().map(str::to_string)).collect();
        match fills {
            Some(fills) if !fills.is_empty() && exact.is_none_or(|n| fills.len() == n) => {
                out.push((fills, item.get("score").and_then(Value::as_f64)));
            }
            _ => tracing::warn!(?item, "candidate with unusable fills"),
        }
    }
    Ok(out)
}

pub fn span_fill(request: &FillRequest, transport: &dyn Transport, backend: &str) -> Result<Vec<FillCandidate>, FillError> {
    request.require_single_mask()?;
    let body = request_body(&request.context_text, &request.mask_token, 1, request.beam_size);
    let reply = transport.post(&body)?;
    let mut out: Vec<FillCandidate> = Vec::new();
    for (rank, (fills, score)) in parse_candidates(&reply, Some(1))?.into_iter().enumerate() {
        let fill = strip_sentinels(&fills[0]).to_string();
        if out.iter().any(|c| c.fills[0] == fill) {
            continue;
        }
        out.push(FillCandidate {
            fills: vec![fill],
            score: score.unwrap_or(-(rank as f64 + 1.0)),
            backend: backend.to_string(),
        });
        if out.len() == request.beam_size {
            break;
        }
    }
    clamp_monotone(&mut out);
    Ok(out)
}

pub struct SpanFiller {
    transport: Box<dyn Transport>,
}

impl SpanFiller {
    pub fn new(transport: Box<dyn Transport>) -> Self {
        SpanFiller { transport }
    }
}

impl MaskFiller for SpanFiller {
    fn name(&self) -> &str {
        "span"
    }

    fn fill(&self, request: &FillRequest, _candidate: &MaskedCandidate) -> Result<Vec<FillCandidate>, FillError> {
        span_fill(request, self.transport.as_ref(), self.name())
    }
}
