//! Test backend that knows the fixed file. It proposes the masked-out
//! original first and the reference fill second, so recall runs exercise
//! ranking past the top candidate.

use super::{FillCandidate, FillError, FillRequest, MaskFiller};
use crate::lex::tokenize;
use crate::templates::MaskedCandidate;

pub struct OracleFiller {
    reference: String,
}

impl OracleFiller {
    pub fn new(reference: impl Into<String>) -> Self {
        OracleFiller {
            reference: reference.into(),
        }
    }

    /// The reference text standing where the mask is, when the rest of the
    /// candidate matches the reference token for token.
    pub fn reference_fill(&self, candidate: &MaskedCandidate) -> Option<String> {
        let [offset] = candidate.mask_offsets[..] else {
            return None;
        };
        let patched = &candidate.patched_unit_text;
        let prefix = tokenize(&patched[..offset]);
        let suffix = tokenize(&patched[offset + candidate.mask_token.len()..]);
        let reference = tokenize(&self.reference);
        if prefix.len() + suffix.len() >= reference.len() {
            return None;
        }
        let head_ok = prefix.iter().zip(&reference).all(|(a, b)| a.text == b.text);
        let tail_ok = suffix
            .iter()
            .rev()
            .zip(reference.iter().rev())
            .all(|(a, b)| a.text == b.text);
        if !head_ok || !tail_ok {
            return None;
        }
        let first = reference[prefix.len()];
        let last = reference[reference.len() - suffix.len() - 1];
        Some(self.reference[first.start..last.end].to_string())
    }
}

impl MaskFiller for OracleFiller {
    fn name(&self) -> &str {
        "oracle"
    }

    fn fill(&self, request: &FillRequest, candidate: &MaskedCandidate) -> Result<Vec<FillCandidate>, FillError> {
        request.require_single_mask()?;
        let mut fills: Vec<String> = Vec::new();
        if !candidate.original_fragment.is_empty() {
            fills.push(candidate.original_fragment.clone());
        }
        if let Some(fill) = self.reference_fill(candidate) {
            if !fills.contains(&fill) {
                fills.push(fill);
            }
        }
        Ok(fills
            .into_iter()
            .take(request.beam_size)
            .enumerate()
            .map(|(rank, fill)| FillCandidate {
                fills: vec![fill],
                score: -(rank as f64 + 1.0),
                backend: self.name().to_string(),
            })
            .collect())
    }
}
