//! Template-based automated program repair where donor code comes from a
//! mask-prediction backend.
//!
//! The flow is: parse the buggy file ([`ast`]), match fix templates against
//! the buggy statement and emit masked edits ([`templates`]), fill masks
//! through a pluggable backend ([`filler`]), then compile and test every
//! patch ([`pipeline`]). [`bench`] drives manifests of bugs and aggregates
//! metrics.

pub mod ast;
pub mod bench;
pub mod filler;
pub mod lex;
pub mod par;
pub mod pipeline;
pub mod templates;

pub use ast::{parse, Language, NodeKind, ParsedUnit, SyntaxNode};
pub use templates::{MaskedCandidate, TemplateId, TemplateOrder, MASK_TOKEN};
