//! Prompt context: the buggy line as a comment, then the enclosing method
//! as it reads after the masked edit.

use super::FillError;
use crate::ast::{AstError, ParsedUnit};
use crate::templates::MaskedCandidate;

/// Lines above and below the edit when no method encloses it.
pub const FALLBACK_WINDOW: usize = 10;

/// Longest method body passed to a backend.
pub const CONTEXT_CAP_LINES: usize = 100;

/// 1-based line of `byte` in `text`.
fn line_of(text: &str, byte: usize) -> usize {
    text.as_bytes()[..byte.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

pub fn build_context(unit: &ParsedUnit, candidate: &MaskedCandidate) -> Result<String, FillError> {
    let anchor = candidate.anchor_line;
    let comment = format!("// {}", unit.line_text(anchor).trim());
    let patched = candidate.patched_unit_text.as_str();
    let lines: Vec<&str> = patched.lines().collect();
    let line_count = lines.len().max(1);

    let (edit_start, edit_end) = candidate.original_bytes;
    let region_first = candidate.patched_region.first.min(line_count);
    let region_last = candidate.patched_region.last.max(region_first).min(line_count);

    let method = match unit.enclosing_method(anchor) {
        Ok(m) => Some(m.span()),
        Err(AstError::NoEnclosingMethod(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let (mut first, mut last) = match method {
        Some(span) if span.byte_start <= edit_start && edit_end <= span.byte_end => {
            let new_end = span.byte_end + candidate.replacement_len - (edit_end - edit_start);
            (line_of(patched, span.byte_start), line_of(patched, new_end.saturating_sub(1)))
        }
        _ => (
            region_first.saturating_sub(FALLBACK_WINDOW).max(1),
            (region_last + FALLBACK_WINDOW).min(line_count),
        ),
    };

    if last + 1 - first > CONTEXT_CAP_LINES {
        let span = region_last + 1 - region_first;
        let before = CONTEXT_CAP_LINES.saturating_sub(span) / 2;
        let lo = region_first.saturating_sub(before).max(first);
        let hi = (lo + CONTEXT_CAP_LINES - 1).min(last);
        first = (hi + 1 - CONTEXT_CAP_LINES).max(first);
        last = hi;
    }

    let mut out = comment;
    for line in &lines[first - 1..last.min(lines.len())] {
        out.push('\n');
        out.push_str(line.trim_end_matches('\r'));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse, Language};
    use crate::templates::{instantiate, select_sites, TemplateFilter, TemplateId, TemplateOrder};

    fn first_candidate(src: &str, line: usize, template: TemplateId) -> (ParsedUnit, MaskedCandidate) {
        let unit = parse(src, Language::Java).unwrap();
        let (sites, _) = select_sites(&unit, &[line], &TemplateOrder::default(), Some(TemplateFilter::Sub(template)));
        let c = instantiate(&sites[0], &unit).unwrap().remove(0);
        (unit, c)
    }

    #[test]
    fn method_context_with_comment() {
        let src = "class A {\n  static boolean mayBeString(Node n, boolean recurse) {\n    if (recurse) {\n      return allResultsMatch(n, MAY_BE_STRING_PREDICATE);\n    }\n    return false;\n  }\n}\n";
        let (unit, c) = first_candidate(src, 4, TemplateId::T5Name);
        let ctx = build_context(&unit, &c).unwrap();
        let expected = "// return allResultsMatch(n, MAY_BE_STRING_PREDICATE);\n  static boolean mayBeString(Node n, boolean recurse) {\n    if (recurse) {\n      return <mask>(n, MAY_BE_STRING_PREDICATE);\n    }\n    return false;\n  }";
        assert_eq!(ctx, expected);
    }

    #[test]
    fn single_statement_method() {
        let src = "class A {\n  int f() { return 1; }\n}\n";
        let (unit, c) = first_candidate(src, 2, TemplateId::T9);
        assert_eq!(build_context(&unit, &c).unwrap(), "// int f() { return 1; }\n  int f() { return <mask>; }");
    }

    #[test]
    fn field_falls_back_to_window() {
        let mut src = String::from("class A {\n");
        for i in 0..15 {
            src.push_str(&format!("  int a{i} = {i};\n"));
        }
        src.push_str("  int target = 7;\n");
        for i in 0..15 {
            src.push_str(&format!("  int b{i} = {i};\n"));
        }
        src.push_str("}\n");
        let (unit, c) = first_candidate(&src, 17, TemplateId::T4);
        let ctx = build_context(&unit, &c).unwrap();
        let lines: Vec<&str> = ctx.lines().collect();
        assert_eq!(lines.len(), 22);
        assert_eq!(lines[0], "// int target = 7;");
        assert_eq!(lines[1], "  int a5 = 5;");
        assert_eq!(lines[11], "  int target = <mask>;");
        assert_eq!(lines[21], "  int b9 = 9;");
    }

    #[test]
    fn long_method_is_capped_around_mask() {
        let mut src = String::from("class A {\n  void f() {\n");
        for i in 0..300 {
            src.push_str(&format!("    x{i} = {i};\n"));
        }
        src.push_str("  }\n}\n");
        let (unit, c) = first_candidate(&src, 203, TemplateId::T4);
        let ctx = build_context(&unit, &c).unwrap();
        assert_eq!(ctx.lines().count(), 1 + CONTEXT_CAP_LINES);
        assert_eq!(ctx.matches("<mask>").count(), 1);
        assert!(ctx.contains(&c.masked_line_text));
    }
}
