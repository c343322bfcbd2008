//! Mask prediction backends.
//!
//! Every backend turns a [`FillRequest`] into a ranked list of
//! [`FillCandidate`]s. The pipeline never looks past that contract.

mod context;
mod donor;
mod oracle;
mod prompt;
mod sequential;
mod span;
mod transport;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::AstError;
use crate::templates::MaskedCandidate;

pub use context::{build_context, CONTEXT_CAP_LINES, FALLBACK_WINDOW};
pub use donor::{donor_fill, DonorFiller, DonorPool};
pub use oracle::OracleFiller;
pub use prompt::{parse_reply, prompt_fill, prompt_text, PromptFiller};
pub use sequential::{sequential_fill, SequentialFiller};
pub use span::{span_fill, strip_sentinels, SpanFiller};
pub use transport::{HttpTransport, Transcript, Transport, API_KEY_ENV};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FillError {
    #[error("endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("request timed out")]
    Timeout,
    #[error("no compatible donor in the local file")]
    EmptyPool,
    #[error("reply holds no prediction list")]
    UnparseableReply(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no endpoint configured for {0}")]
    MissingEndpoint(Backend),
    #[error(transparent)]
    Context(#[from] AstError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FillRequest {
    pub context_text: String,
    pub masked_line: String,
    pub mask_count: usize,
    pub beam_size: usize,
    pub mask_token: String,
}

impl FillRequest {
    pub fn new(context_text: String, candidate: &MaskedCandidate, beam_size: usize) -> Self {
        FillRequest {
            context_text,
            masked_line: candidate.masked_line_text.clone(),
            mask_count: candidate.mask_count,
            beam_size: beam_size.max(1),
            mask_token: candidate.mask_token.clone(),
        }
    }

    fn require_single_mask(&self) -> Result<(), FillError> {
        if self.mask_count != 1 {
            return Err(FillError::InvalidRequest(format!(
                "expected one mask, got {}",
                self.mask_count
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillCandidate {
    pub fills: Vec<String>,
    pub score: f64,
    pub backend: String,
}

/// A mask prediction backend.
pub trait MaskFiller: Send + Sync {
    fn name(&self) -> &str;

    /// Ranked fills for `request`, best first. `candidate` carries the
    /// slot metadata some backends key on.
    fn fill(&self, request: &FillRequest, candidate: &MaskedCandidate) -> Result<Vec<FillCandidate>, FillError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Donor,
    #[default]
    Span,
    Sequential,
    Prompt,
    Oracle,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Donor => "donor",
            Backend::Span => "span",
            Backend::Sequential => "sequential",
            Backend::Prompt => "prompt",
            Backend::Oracle => "oracle",
        }
    }

    pub fn is_remote(self) -> bool {
        matches!(self, Backend::Span | Backend::Sequential | Backend::Prompt)
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "donor" => Backend::Donor,
            "span" => Backend::Span,
            "sequential" => Backend::Sequential,
            "prompt" => Backend::Prompt,
            "oracle" => Backend::Oracle,
            other => return Err(format!("unknown filler backend `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FillerConfig {
    pub backend: Backend,
    pub endpoint: Option<String>,
    pub timeout_secs: f64,
    pub max_in_flight: usize,
    /// Inclusive range of successive masks tried by the sequential backend.
    pub mask_count_range: (usize, usize),
}

impl Default for FillerConfig {
    fn default() -> Self {
        FillerConfig {
            backend: Backend::Span,
            endpoint: None,
            timeout_secs: 60.0,
            max_in_flight: 4,
            mask_count_range: (1, 20),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid filler config: {0}")]
pub struct ConfigError(pub String);

impl FillerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (low, high) = self.mask_count_range;
        if low < 1 || high < low {
            return Err(ConfigError(format!("mask_count_range ({low}, {high}) must satisfy 1 <= low <= high")));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(ConfigError("timeout_secs must be positive".into()));
        }
        if self.max_in_flight == 0 {
            return Err(ConfigError("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    /// HTTP transport for the configured endpoint.
    pub fn transport(&self, transcript: Transcript) -> Result<HttpTransport, FillError> {
        let endpoint = self
            .endpoint
            .clone()
            .ok_or(FillError::MissingEndpoint(self.backend))?;
        Ok(HttpTransport::new(endpoint, self.timeout(), self.max_in_flight, transcript))
    }
}

/// Enforces non-increasing scores without reordering.
pub(crate) fn clamp_monotone(candidates: &mut [FillCandidate]) {
    let mut floor = f64::INFINITY;
    for c in candidates {
        if c.score.is_nan() || c.score > floor {
            c.score = floor;
        }
        floor = c.score;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_clamp() {
        let mut c: Vec<FillCandidate> = [-1.0, -0.5, -3.0, f64::NAN]
            .into_iter()
            .map(|score| FillCandidate {
                fills: vec![],
                score,
                backend: "x".into(),
            })
            .collect();
        clamp_monotone(&mut c);
        let scores: Vec<f64> = c.iter().map(|c| c.score).collect();
        assert_eq!(scores, [-1.0, -1.0, -3.0, -3.0]);
    }

    #[test]
    fn config_validation() {
        assert!(FillerConfig::default().validate().is_ok());
        let bad = FillerConfig {
            mask_count_range: (0, 3),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = FillerConfig {
            timeout_secs: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!("Donor".parse::<Backend>(), Ok(Backend::Donor));
        let parsed: FillerConfig = serde_json::from_str(r#"{"backend":"prompt","mask_count_range":[1,5]}"#).unwrap();
        assert_eq!(parsed.backend, Backend::Prompt);
        assert_eq!(parsed.mask_count_range, (1, 5));
    }
}
