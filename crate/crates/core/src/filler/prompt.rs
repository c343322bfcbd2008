//! Chat-model backend: a fixed instruction followed by the context, reply
//! parsed as a ranked list.

use std::sync::OnceLock;

use regex::Regex;
use serde_json::{json, Value};

use super::{FillCandidate, FillError, FillRequest, MaskFiller, Transport};
use crate::templates::MaskedCandidate;

pub fn prompt_text(request: &FillRequest) -> String {
    format!(
        "Next token prediction task, the first line is a comment to help prediction, just return {} possible predictions for {} with highest probability:\n{}",
        request.beam_size, request.mask_token, request.context_text
    )
}

fn list_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:\d+\s*[.):]|[-*•])\s*").unwrap())
}

/// Fills listed in a chat reply, one per line, numbered or bulleted.
/// Code fences and surrounding backticks are dropped.
pub fn parse_reply(text: &str) -> Result<Vec<String>, FillError> {
    let mut fills = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("```") {
            continue;
        }
        let item = list_marker().replace(trimmed, "");
        let item = item.trim().trim_matches('`').trim();
        if !item.is_empty() && !fills.iter().any(|f: &String| f == item) {
            fills.push(item.to_string());
        }
    }
    if fills.is_empty() {
        return Err(FillError::UnparseableReply(text.to_string()));
    }
    Ok(fills)
}

pub fn prompt_fill(request: &FillRequest, transport: &dyn Transport, backend: &str) -> Result<Vec<FillCandidate>, FillError> {
    request.require_single_mask()?;
    let reply = transport.post(&json!({ "prompt": prompt_text(request) }))?;
    let text = reply
        .get("text")
        .and_then(Value::as_str)
        .ok_or_else(|| FillError::MalformedResponse("missing `text`".into()))?;
    let fills = match parse_reply(text) {
        Ok(fills) => fills,
        Err(FillError::UnparseableReply(raw)) => {
            tracing::warn!(reply = %raw, "unparseable chat reply");
            return Ok(Vec::new());
        }
        Err(e) => return Err(e),
    };
    Ok(fills
        .into_iter()
        .take(request.beam_size)
        .enumerate()
        .map(|(rank, fill)| FillCandidate {
            fills: vec![fill],
            score: -(rank as f64 + 1.0),
            backend: backend.to_string(),
        })
        .collect())
}

pub struct PromptFiller {
    transport: Box<dyn Transport>,
}

impl PromptFiller {
    pub fn new(transport: Box<dyn Transport>) -> Self {
        PromptFiller { transport }
    }
}

impl MaskFiller for PromptFiller {
    fn name(&self) -> &str {
        "prompt"
    }

    fn fill(&self, request: &FillRequest, _candidate: &MaskedCandidate) -> Result<Vec<FillCandidate>, FillError> {
        prompt_fill(request, self.transport.as_ref(), self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(beam: usize) -> FillRequest {
        FillRequest {
            context_text: "// int i = s.indexOf('.');\nint i = s.<mask>('.');".into(),
            masked_line: "int i = s.<mask>('.');".into(),
            mask_count: 1,
            beam_size: beam,
            mask_token: "<mask>".into(),
        }
    }

    fn reply(text: String) -> impl Fn(&Value) -> Result<Value, FillError> + Send + Sync {
        move |_| Ok(json!({ "text": text.clone() }))
    }

    #[test]
    fn prompt_wording() {
        let p = prompt_text(&request(250));
        assert!(p.starts_with("Next token prediction task, the first line is a comment to help prediction, just return 250 possible predictions for <mask> with highest probability:\n// int i"));
    }

    #[test]
    fn numbered_reply_in_order() {
        let got = prompt_fill(&request(250), &reply("1. lastIndexOf\n2. indexOf".into()), "prompt").unwrap();
        let fills: Vec<&str> = got.iter().map(|c| c.fills[0].as_str()).collect();
        assert_eq!(fills, ["lastIndexOf", "indexOf"]);
        assert_eq!(got[0].score, -1.0);
        assert_eq!(got[1].score, -2.0);
    }

    #[test]
    fn empty_reply_is_empty_list() {
        assert_eq!(prompt_fill(&request(5), &reply(String::new()), "prompt").unwrap(), vec![]);
        assert!(matches!(parse_reply("  \n"), Err(FillError::UnparseableReply(_))));
    }

    #[test]
    fn long_reply_truncated_to_beam() {
        let text: String = (1..=300).map(|i| format!("{i}. tok{i}\n")).collect();
        let got = prompt_fill(&request(250), &reply(text), "prompt").unwrap();
        assert_eq!(got.len(), 250);
        assert_eq!(got[249].fills, ["tok250"]);
    }

    #[test]
    fn bullets_and_backticks() {
        assert_eq!(parse_reply("- `a`\n* b\n```\n3) c").unwrap(), ["a", "b", "c"]);
    }
}
