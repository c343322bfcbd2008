//! Text-edit plumbing shared by the template instantiations.

use super::{EditKind, LineRange, MaskSlot, MaskedCandidate, MatchSite, MASK_TOKEN};
use crate::ast::{ParsedUnit, Span, SyntaxNode};

/// Replacement text that remembers where its masks sit.
#[derive(Debug, Clone, Default)]
pub(crate) struct Replacement {
    pub(crate) text: String,
    pub(crate) masks: Vec<usize>,
}

impl Replacement {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn text(s: &str) -> Self {
        let mut r = Self::new();
        r.push(s);
        r
    }

    pub(crate) fn masked() -> Self {
        let mut r = Self::new();
        r.mask();
        r
    }

    pub(crate) fn push(&mut self, s: &str) -> &mut Self {
        self.text.push_str(s);
        self
    }

    pub(crate) fn mask(&mut self) -> &mut Self {
        self.masks.push(self.text.len());
        self.text.push_str(MASK_TOKEN);
        self
    }

    pub(crate) fn append(&mut self, other: &Replacement) -> &mut Self {
        let base = self.text.len();
        self.masks.extend(other.masks.iter().map(|m| m + base));
        self.text.push_str(&other.text);
        self
    }
}

/// Replace `start..end` of the original source.
#[derive(Debug, Clone)]
pub(crate) struct TextEdit {
    pub(crate) start: usize,
    pub(crate) end: usize,
    pub(crate) replacement: Replacement,
}

impl TextEdit {
    pub(crate) fn replace(span: &Span, replacement: Replacement) -> Self {
        TextEdit {
            start: span.byte_start,
            end: span.byte_end,
            replacement,
        }
    }

    pub(crate) fn insert(at: usize, replacement: Replacement) -> Self {
        TextEdit {
            start: at,
            end: at,
            replacement,
        }
    }
}

/// Indentation context for statement-level edits.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub(crate) indent: String,
    pub(crate) unit: &'static str,
    /// The statement owns its lines (nothing else shares them).
    pub(crate) isolated: bool,
}

impl Layout {
    pub(crate) fn of(unit: &ParsedUnit, span: &Span) -> Layout {
        let first_line = unit.line_text(span.start.line);
        let indent: String = first_line
            .chars()
            .take_while(|c| *c == ' ' || *c == '\t')
            .collect();
        let indent_unit = if indent.contains('\t') { "\t" } else { "    " };
        Layout {
            isolated: is_line_isolated(unit, span),
            indent,
            unit: indent_unit,
        }
    }

    pub(crate) fn newline(&self) -> &'static str {
        if self.isolated {
            "\n"
        } else {
            " "
        }
    }
}

pub(crate) fn is_line_isolated(unit: &ParsedUnit, span: &Span) -> bool {
    let (first, last) = unit.lines_of(span);
    let before = &unit.source()[unit.line_range(first).start..span.byte_start];
    let after_end = unit.line_range(last).end;
    let after = if span.byte_end <= after_end {
        &unit.source()[span.byte_end..after_end]
    } else {
        ""
    };
    before.trim().is_empty() && after.trim().is_empty()
}

/// Byte range covering whole lines `first..=last`, newline included.
pub(crate) fn full_lines(unit: &ParsedUnit, first: usize, last: usize) -> (usize, usize) {
    (
        unit.full_line_range(first).start,
        unit.full_line_range(last).end,
    )
}

fn line_starts(text: &str) -> Vec<usize> {
    let mut starts = vec![0];
    starts.extend(
        text.bytes()
            .enumerate()
            .filter(|&(i, b)| b == b'\n' && i + 1 < text.len())
            .map(|(i, _)| i + 1),
    );
    starts
}

fn line_of(starts: &[usize], byte: usize) -> usize {
    starts.partition_point(|&s| s <= byte).max(1)
}

fn line_bounds(text: &str, starts: &[usize], line: usize) -> (usize, usize) {
    let start = starts[line - 1];
    let end = starts.get(line).map(|&n| n - 1).unwrap_or(text.len());
    (start, end)
}

pub(crate) struct CandidateSpec {
    pub(crate) edit_kind: EditKind,
    pub(crate) edit: TextEdit,
    pub(crate) slot: Option<MaskSlot>,
    pub(crate) original_fragment: String,
}

pub(crate) fn build_candidate(
    unit: &ParsedUnit,
    site: &MatchSite,
    node: SyntaxNode<'_>,
    spec: CandidateSpec,
) -> MaskedCandidate {
    let src = unit.source();
    let TextEdit {
        start,
        end,
        replacement,
    } = spec.edit;
    let mut patched = String::with_capacity(src.len() + replacement.text.len());
    patched.push_str(&src[..start]);
    patched.push_str(&replacement.text);
    patched.push_str(&src[end..]);
    let mask_offsets: Vec<usize> = replacement.masks.iter().map(|m| m + start).collect();

    let orig_starts = unit.line_starts();
    let at_line_start = orig_starts.binary_search(&start).is_ok();
    let original_region = if start == end && at_line_start {
        let line = line_of(orig_starts, start);
        LineRange {
            first: line,
            last: line - 1,
        }
    } else {
        LineRange {
            first: line_of(orig_starts, start),
            last: line_of(orig_starts, end.max(start + 1) - 1),
        }
    };

    let starts = line_starts(&patched);
    let new_end = start + replacement.text.len();
    let whole_line_deletion =
        replacement.text.is_empty() && at_line_start && src[start..end].ends_with('\n');
    let (patched_region, masked_line_text) = if whole_line_deletion {
        let line = line_of(&starts, start.min(patched.len().saturating_sub(1)));
        (
            LineRange {
                first: line,
                last: line - 1,
            },
            String::new(),
        )
    } else {
        let first = line_of(&starts, start.min(patched.len().saturating_sub(1)));
        let last = line_of(&starts, new_end.max(start + 1) - 1);
        let (a, _) = line_bounds(&patched, &starts, first);
        let (_, b) = line_bounds(&patched, &starts, last);
        (LineRange { first, last }, patched[a..b].trim_end_matches('\r').to_string())
    };

    MaskedCandidate {
        template: site.template,
        edit_kind: spec.edit_kind,
        mask_count: mask_offsets.len(),
        masked_line_text,
        patched_unit_text: patched,
        mask_token: MASK_TOKEN.to_string(),
        mask_offsets,
        slot: spec.slot,
        original_fragment: spec.original_fragment,
        anchor_line: site.anchor_line,
        node: node.id(),
        original_region,
        patched_region,
        original_bytes: (start, end),
        replacement_len: replacement.text.len(),
    }
}
