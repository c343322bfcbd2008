//! Sub-template instantiation: each match site becomes one or more
//! textual edits of the original file.

use super::catalog::{TemplateFilter, TemplateId, TemplateOrder};
use super::edit::{build_candidate, full_lines, is_line_isolated, CandidateSpec, Layout, Replacement, TextEdit};
use super::select::{select_templates, OperatorFamily};
use super::{EditKind, MaskSlot, MaskedCandidate, MatchSite, TemplateError, MAX_CANDIDATES_PER_SITE};
use crate::ast::{NodeKind, ParsedUnit, Span, SyntaxNode};
use crate::par::{self, Execution};

struct Builder<'a> {
    unit: &'a ParsedUnit,
    site: &'a MatchSite,
    node: SyntaxNode<'a>,
    out: Vec<MaskedCandidate>,
}

impl<'a> Builder<'a> {
    fn emit(&mut self, edit_kind: EditKind, edit: TextEdit, slot: Option<MaskSlot>, original_fragment: &str) {
        if self.out.len() >= MAX_CANDIDATES_PER_SITE {
            return;
        }
        let spec = CandidateSpec {
            edit_kind,
            edit,
            slot,
            original_fragment: original_fragment.to_string(),
        };
        self.out.push(build_candidate(self.unit, self.site, self.node, spec));
    }

    /// Replace one node with a single mask.
    fn mask_node(&mut self, target: SyntaxNode<'_>, slot: MaskSlot) {
        let edit = TextEdit::replace(&target.span(), Replacement::masked());
        self.emit(EditKind::Replace, edit, Some(slot), target.text());
    }

    fn replace_node(&mut self, target: SyntaxNode<'_>, text: &str) {
        let edit = TextEdit::replace(&target.span(), Replacement::text(text));
        self.emit(EditKind::Replace, edit, None, target.text());
    }
}

/// `{head} { stmt }{tail}` around the statement, re-indented when the
/// statement owns its lines.
fn wrap(unit: &ParsedUnit, stmt: SyntaxNode<'_>, head: Replacement, tail: &str) -> TextEdit {
    let span = stmt.span();
    let layout = Layout::of(unit, &span);
    let mut r = Replacement::new();
    if layout.isolated {
        let (first, last) = unit.lines_of(&span);
        r.push(&layout.indent).append(&head).push(" {\n");
        for line in first..=last {
            let text = unit.line_text(line);
            if !text.trim().is_empty() {
                r.push(layout.unit).push(text);
            }
            r.push("\n");
        }
        r.push(&layout.indent).push("}").push(tail);
        TextEdit {
            start: unit.line_range(first).start,
            end: unit.line_range(last).end,
            replacement: r,
        }
    } else {
        r.append(&head).push(" { ").push(stmt.text()).push(" }").push(tail);
        TextEdit::replace(&span, r)
    }
}

/// Inserts `lines` (each relative to the statement's indentation) before
/// the statement.
fn insert_before(unit: &ParsedUnit, stmt: SyntaxNode<'_>, lines: &[(usize, Replacement)]) -> TextEdit {
    let span = stmt.span();
    let layout = Layout::of(unit, &span);
    let mut r = Replacement::new();
    for (depth, line) in lines {
        if layout.isolated {
            r.push(&layout.indent);
            for _ in 0..*depth {
                r.push(layout.unit);
            }
        }
        r.append(line).push(layout.newline());
    }
    let at = if layout.isolated {
        unit.line_range(span.start.line).start
    } else {
        span.byte_start
    };
    TextEdit::insert(at, r)
}

fn null_guard(exp: &str, body: Replacement) -> Vec<(usize, Replacement)> {
    vec![
        (0, Replacement::text(&format!("if ({exp} == null) {{"))),
        (1, body),
        (0, Replacement::text("}")),
    ]
}

fn delete_statement(unit: &ParsedUnit, span: &Span) -> TextEdit {
    if is_line_isolated(unit, span) {
        let (first, last) = unit.lines_of(span);
        let (start, end) = full_lines(unit, first, last);
        TextEdit::insert(start, Replacement::new()).with_end(end)
    } else {
        TextEdit::replace(span, Replacement::new())
    }
}

impl TextEdit {
    fn with_end(mut self, end: usize) -> Self {
        self.end = end;
        self
    }
}

fn strip_generics(ty: &str) -> String {
    let mut depth = 0usize;
    ty.chars()
        .filter(|&c| {
            match c {
                '<' => depth += 1,
                '>' => {
                    depth = depth.saturating_sub(1);
                    return false;
                }
                _ => {}
            }
            depth == 0
        })
        .collect()
}

fn is_primary(node: &SyntaxNode<'_>) -> bool {
    matches!(
        node.grammar_kind(),
        "identifier" | "field_access" | "method_invocation" | "parenthesized_expression" | "array_access" | "this"
    )
}

/// Sibling statements of `stmt` inside its enclosing block.
fn block_siblings<'a>(stmt: SyntaxNode<'a>) -> Option<Vec<SyntaxNode<'a>>> {
    let parent = stmt.parent()?;
    if parent.kind() != NodeKind::Block {
        return None;
    }
    Some(parent.named_children().collect())
}

/// Moves siblings `[from..=to]` to every other position in the block.
fn move_candidates(b: &mut Builder<'_>, siblings: &[SyntaxNode<'_>], from: usize, to: usize) {
    let unit = b.unit;
    if !siblings.iter().all(|s| is_line_isolated(unit, &s.span())) {
        return;
    }
    let src = unit.source();
    let (first_line, _) = unit.lines_of(&siblings[from].span());
    let (_, last_line) = unit.lines_of(&siblings[to].span());
    let (a, z) = full_lines(unit, first_line, last_line);
    let moved = &src[a..z];
    for position in 0..=siblings.len() {
        if (from..=to + 1).contains(&position) {
            continue;
        }
        let at = if position < siblings.len() {
            unit.line_range(siblings[position].span().start.line).start
        } else {
            let (_, last) = unit.lines_of(&siblings[siblings.len() - 1].span());
            unit.full_line_range(last).end
        };
        let mut r = Replacement::new();
        let edit = if at < a {
            r.push(moved).push(&src[at..a]);
            TextEdit { start: at, end: z, replacement: r }
        } else {
            r.push(&src[z..at]).push(moved);
            TextEdit { start: a, end: at, replacement: r }
        };
        b.emit(EditKind::Move, edit, None, "");
    }
}

/// Consecutive sibling statements covering `first..=last`.
fn hunk_statements<'a>(unit: &'a ParsedUnit, first: usize, last: usize) -> Option<(Vec<SyntaxNode<'a>>, usize, usize)> {
    let mut stmts: Vec<SyntaxNode<'a>> = Vec::new();
    for line in first..=last {
        if let Ok(s) = unit.statement_at(line) {
            if !stmts.contains(&s) {
                stmts.push(s);
            }
        }
    }
    let head = *stmts.first()?;
    let siblings = block_siblings(head)?;
    let from = siblings.iter().position(|s| *s == head)?;
    let to = from + stmts.len() - 1;
    if to >= siblings.len() || siblings[from..=to] != stmts[..] {
        return None;
    }
    Some((siblings, from, to))
}

fn instantiate_hunk(b: &mut Builder<'_>, last_line: usize) -> Result<(), TemplateError> {
    let unit = b.unit;
    let not_applicable = TemplateError::NotApplicable {
        template: b.site.template,
        reason: "hunk lines are not consecutive statements of one block",
    };
    let (siblings, from, to) = hunk_statements(unit, b.site.anchor_line, last_line).ok_or(not_applicable)?;
    match b.site.template {
        TemplateId::T11 => {
            if !siblings[from..=to].iter().all(|s| is_line_isolated(unit, &s.span())) {
                return Ok(());
            }
            let (first, _) = unit.lines_of(&siblings[from].span());
            let (_, last) = unit.lines_of(&siblings[to].span());
            let (start, end) = full_lines(unit, first, last);
            b.emit(EditKind::Delete, TextEdit::insert(start, Replacement::new()).with_end(end), None, "");
        }
        TemplateId::T13 => move_candidates(b, &siblings, from, to),
        _ => {}
    }
    Ok(())
}

/// Produces the edits a match site stands for.
pub fn instantiate(site: &MatchSite, unit: &ParsedUnit) -> Result<Vec<MaskedCandidate>, TemplateError> {
    let stmt = unit.statement_at(site.anchor_line)?;
    let node = unit.node(site.node);
    let mut b = Builder {
        unit,
        site,
        node,
        out: Vec::new(),
    };
    let not_applicable = |reason| TemplateError::NotApplicable {
        template: site.template,
        reason,
    };

    if let Some(last_line) = site.hunk_end {
        instantiate_hunk(&mut b, last_line)?;
        return if b.out.is_empty() {
            Err(not_applicable("no hunk-level edit available"))
        } else {
            Ok(b.out)
        };
    }

    use TemplateId::*;
    match site.template {
        T1 => {
            let value = node.child_by_field("value").ok_or(not_applicable("cast without operand"))?;
            let ty = node.child_by_field("type").ok_or(not_applicable("cast without type"))?;
            let exp = if is_primary(&value) {
                value.text().to_string()
            } else {
                format!("({})", value.text())
            };
            let head = Replacement::text(&format!("if ({exp} instanceof {})", strip_generics(ty.text())));
            let edit = wrap(unit, stmt, head, "");
            b.emit(EditKind::Wrap, edit, None, "");
        }
        T2Remove => {
            let left = node.child_by_field("left").ok_or(not_applicable("missing operand"))?;
            let right = node.child_by_field("right").ok_or(not_applicable("missing operand"))?;
            b.replace_node(node, left.text());
            b.replace_node(node, right.text());
        }
        T2Update => {
            for field in ["left", "right"] {
                if let Some(operand) = node.child_by_field(field) {
                    b.mask_node(operand, MaskSlot::Condition);
                }
            }
        }
        T2Add => {
            let mut r = Replacement::text(" ");
            r.mask();
            let edit = TextEdit::insert(node.span().byte_end, r);
            b.emit(EditKind::Replace, edit, Some(MaskSlot::Condition), "");
        }
        T2ReplaceWhole => b.mask_node(node, MaskSlot::Condition),
        T3 => {
            let ty = node.child_by_field("type").ok_or(not_applicable("no type"))?;
            b.mask_node(ty, MaskSlot::Type);
        }
        T4 => {
            let NodeKind::Literal(kind) = node.kind() else {
                return Err(not_applicable("not a literal"));
            };
            b.mask_node(node, MaskSlot::Literal { kind });
        }
        T5Name => {
            let name = node.child_by_field("name").ok_or(not_applicable("call without name"))?;
            b.mask_node(name, MaskSlot::MethodName {
                callee: name.text().to_string(),
            });
        }
        T5ArgInsert => {
            let args: Vec<_> = node.named_children().collect();
            let (at, r) = match args.last() {
                Some(last) => {
                    let mut r = Replacement::text(", ");
                    r.mask();
                    (last.span().byte_end, r)
                }
                None => (node.span().byte_start + 1, Replacement::masked()),
            };
            b.emit(EditKind::Replace, TextEdit::insert(at, r), Some(MaskSlot::Expression), "");
        }
        T5ArgRemove => {
            let args: Vec<_> = node.named_children().collect();
            for (i, arg) in args.iter().enumerate() {
                let (start, end) = match (i, args.len()) {
                    (_, 1) => (arg.span().byte_start, arg.span().byte_end),
                    (0, _) => (arg.span().byte_start, args[1].span().byte_start),
                    _ => (args[i - 1].span().byte_end, arg.span().byte_end),
                };
                let edit = TextEdit {
                    start,
                    end,
                    replacement: Replacement::new(),
                };
                b.emit(EditKind::Replace, edit, None, arg.text());
            }
        }
        T5ArgReplace => {
            for arg in node.named_children() {
                b.mask_node(arg, MaskSlot::Expression);
            }
        }
        T6Skip => {
            let head = Replacement::text(&format!("if ({} != null)", node.text()));
            let edit = wrap(unit, stmt, head, "");
            b.emit(EditKind::Wrap, edit, None, "");
        }
        T6Return | T6Continue | T6Throw | T6Reassign => {
            let exp = node.text();
            let (body, slot) = match site.template {
                T6Return => {
                    let mut r = Replacement::text("return ");
                    r.mask().push(";");
                    (r, Some(MaskSlot::Expression))
                }
                T6Continue => (Replacement::text("continue;"), None),
                T6Throw => (Replacement::text("throw new IllegalArgumentException();"), None),
                _ => {
                    let mut r = Replacement::text(&format!("{exp} = "));
                    r.mask().push(";");
                    (r, Some(MaskSlot::Expression))
                }
            };
            let edit = insert_before(unit, stmt, &null_guard(exp, body));
            b.emit(EditKind::InsertBefore, edit, slot, "");
        }
        T7Priority => {
            let op2 = node.operator().ok_or(not_applicable("no operator"))?.text();
            let left = node.child_by_field("left").ok_or(not_applicable("missing operand"))?;
            let right = node.child_by_field("right").ok_or(not_applicable("missing operand"))?;
            let (inner_left, inner_right) = (left.unparenthesized(), right.unparenthesized());
            let mut emitted = false;
            if inner_left.grammar_kind() == "binary_expression" {
                if let (Some(a), Some(op1), Some(c)) = (
                    inner_left.child_by_field("left"),
                    inner_left.operator(),
                    inner_left.child_by_field("right"),
                ) {
                    let text = format!("{} {} ({} {op2} {})", a.text(), op1.text(), c.text(), right.text());
                    b.replace_node(node, &text);
                    emitted = true;
                }
            }
            if inner_right.grammar_kind() == "binary_expression" {
                if let (Some(c), Some(op1), Some(d)) = (
                    inner_right.child_by_field("left"),
                    inner_right.operator(),
                    inner_right.child_by_field("right"),
                ) {
                    let text = format!("({} {op2} {}) {} {}", left.text(), c.text(), op1.text(), d.text());
                    b.replace_node(node, &text);
                    emitted = true;
                }
            }
            if !emitted {
                return Err(not_applicable("single-operator expression"));
            }
        }
        T7Operator => {
            let family = OperatorFamily::of(node.text()).ok_or(not_applicable("unknown operator"))?;
            b.mask_node(node, MaskSlot::Operator { family });
        }
        T8 => {
            let array = node.child_by_field("array").ok_or(not_applicable("no array"))?;
            let index = node.child_by_field("index").ok_or(not_applicable("no index"))?;
            let head = Replacement::text(&format!("if ({} < {}.length)", index.text(), array.text()));
            let edit = wrap(unit, stmt, head, "");
            b.emit(EditKind::Wrap, edit, None, "");
        }
        T9 => {
            let value = node.named_children().next().ok_or(not_applicable("bare return"))?;
            b.mask_node(value, MaskSlot::Expression);
        }
        T10Return => {
            let mut r = Replacement::text("return ");
            r.mask().push(";");
            let edit = insert_before(unit, stmt, &[(0, r)]);
            b.emit(EditKind::InsertBefore, edit, Some(MaskSlot::Expression), "");
        }
        T10TryCatch => {
            let edit = wrap(unit, stmt, Replacement::text("try"), " catch (Exception e) {}");
            b.emit(EditKind::Wrap, edit, None, "");
        }
        T10IfWrap => {
            let mut head = Replacement::text("if (");
            head.mask().push(")");
            let edit = wrap(unit, stmt, head, "");
            b.emit(EditKind::Wrap, edit, Some(MaskSlot::Condition), "");
        }
        T10Simple => {
            let mut r = Replacement::masked();
            r.push(";");
            let edit = insert_before(unit, stmt, &[(0, r)]);
            b.emit(EditKind::InsertBefore, edit, Some(MaskSlot::Statement), "");
        }
        T11 => {
            let edit = delete_statement(unit, &stmt.span());
            b.emit(EditKind::Delete, edit, None, "");
        }
        T12 => b.mask_node(node, MaskSlot::Variable {
            name: node.text().to_string(),
        }),
        T13 => {
            let siblings = block_siblings(stmt).ok_or(not_applicable("statement is not inside a block"))?;
            let index = siblings
                .iter()
                .position(|s| *s == stmt)
                .ok_or(not_applicable("statement is not a block child"))?;
            move_candidates(&mut b, &siblings, index, index);
        }
    }

    if b.out.is_empty() {
        return Err(not_applicable("no edit could be produced"));
    }
    Ok(b.out)
}

/// Hunk-level removal/move sites for each contiguous run of buggy lines
/// longer than one line.
pub fn hunk_sites(unit: &ParsedUnit, lines: &[usize]) -> Vec<MatchSite> {
    let mut sorted = lines.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for line in sorted {
        match runs.last_mut() {
            Some((_, end)) if *end + 1 == line => *end = line,
            _ => runs.push((line, line)),
        }
    }
    let mut sites = Vec::new();
    for (first, last) in runs.into_iter().filter(|(a, b)| b > a) {
        let Some((siblings, from, to)) = hunk_statements(unit, first, last) else {
            continue;
        };
        if to == from {
            continue;
        }
        for template in [TemplateId::T11, TemplateId::T13] {
            sites.push(MatchSite {
                template,
                node: siblings[from].id(),
                anchor_line: first,
                hunk_end: Some(last),
            });
        }
    }
    sites
}

/// Match sites for all buggy lines, merged into one enumeration order:
/// template priority first, then document order of the matched node.
pub fn select_sites(
    unit: &ParsedUnit,
    lines: &[usize],
    order: &TemplateOrder,
    filter: Option<TemplateFilter>,
) -> (Vec<MatchSite>, Vec<(usize, TemplateError)>) {
    let mut sites = Vec::new();
    let mut errors = Vec::new();
    for &line in lines {
        match select_templates(unit, line, order) {
            Ok(found) => sites.extend(found),
            Err(e) => errors.push((line, e)),
        }
    }
    sites.extend(hunk_sites(unit, lines));
    if let Some(filter) = filter {
        sites.retain(|s| filter.accepts(s.template));
    }
    sites.sort_by_key(|s| (order.position(s.template), s.node, s.hunk_end.is_some(), s.anchor_line));
    sites.dedup();
    (sites, errors)
}

/// Selects and instantiates every site for `lines`. Instantiation fans out
/// according to `exec`; the result keeps enumeration order.
pub fn mask_lines(
    unit: &ParsedUnit,
    lines: &[usize],
    order: &TemplateOrder,
    filter: Option<TemplateFilter>,
    exec: Execution,
) -> Vec<(MatchSite, Result<Vec<MaskedCandidate>, TemplateError>)> {
    let (sites, _) = select_sites(unit, lines, order, filter);
    let results = par::map(exec, &sites, |site| instantiate(site, unit));
    sites.into_iter().zip(results).collect()
}
