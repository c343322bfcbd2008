//! Mask fix templates: matching against the buggy statement and
//! instantiating masked (or complete) edits.

mod catalog;
mod edit;
mod instantiate;
mod select;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{AstError, LiteralKind, NodeId};

pub use catalog::{
    InvalidOrder, TemplateFilter, TemplateId, TemplateOrder, UnknownTemplate, DEFAULT_MAJOR_ORDER,
};
pub use instantiate::{hunk_sites, instantiate, mask_lines, select_sites};
pub use select::{is_variable_occurrence, select_templates, OperatorFamily};
pub(crate) use select::is_mutable_operator;

/// Placeholder literal used in all candidate text.
pub const MASK_TOKEN: &str = "<mask>";

/// Upper bound on instantiations per (template, node) pair.
pub const MAX_CANDIDATES_PER_SITE: usize = 50;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error(transparent)]
    Ast(#[from] AstError),
    #[error("{template} does not apply: {reason}")]
    NotApplicable {
        template: TemplateId,
        reason: &'static str,
    },
}

/// A (template, node) pair found on the buggy statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MatchSite {
    pub template: TemplateId,
    pub node: NodeId,
    pub anchor_line: usize,
    /// Set for hunk-level removal/move sites spanning
    /// `anchor_line..=hunk_end`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hunk_end: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EditKind {
    Replace,
    InsertBefore,
    InsertAfter,
    Wrap,
    Delete,
    Move,
}

/// What the mask stands in for; donor retrieval keys off this.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "slot", rename_all = "kebab-case")]
pub enum MaskSlot {
    MethodName { callee: String },
    Variable { name: String },
    Literal { kind: LiteralKind },
    Operator { family: OperatorFamily },
    Type,
    Condition,
    Expression,
    Statement,
}

/// Inclusive 1-based line range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LineRange {
    pub first: usize,
    pub last: usize,
}

impl LineRange {
    pub fn contains(&self, line: usize) -> bool {
        self.first <= line && line <= self.last
    }
}

/// One template instantiation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskedCandidate {
    pub template: TemplateId,
    pub edit_kind: EditKind,
    /// The edited line(s) as they read in the patched file.
    pub masked_line_text: String,
    pub mask_count: usize,
    pub patched_unit_text: String,
    pub mask_token: String,
    /// Byte offsets of each mask in `patched_unit_text`.
    pub mask_offsets: Vec<usize>,
    pub slot: Option<MaskSlot>,
    /// Source text the mask replaced; empty for pure insertions.
    pub original_fragment: String,
    pub anchor_line: usize,
    pub node: NodeId,
    /// Lines of the original file the edit rewrites.
    pub original_region: LineRange,
    /// Lines of the patched file holding the edit.
    pub patched_region: LineRange,
    /// Byte range of the original file the edit replaces.
    pub original_bytes: (usize, usize),
    pub replacement_len: usize,
}

impl MaskedCandidate {
    pub fn is_complete(&self) -> bool {
        self.mask_count == 0
    }

    /// Splices one fill per mask into the patched text.
    pub fn fill(&self, fills: &[String]) -> Option<String> {
        if fills.len() != self.mask_offsets.len() {
            return None;
        }
        let mut out = String::with_capacity(self.patched_unit_text.len() + 64);
        let mut cursor = 0;
        for (offset, fill) in self.mask_offsets.iter().zip(fills) {
            out.push_str(&self.patched_unit_text[cursor..*offset]);
            out.push_str(fill);
            cursor = offset + self.mask_token.len();
        }
        out.push_str(&self.patched_unit_text[cursor..]);
        Some(out)
    }
}
