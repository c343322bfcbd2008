//! Depth-first template matching over the buggy statement.

use serde::{Deserialize, Serialize};

use super::{MatchSite, TemplateError, TemplateId, TemplateOrder};
use crate::ast::{NodeKind, ParsedUnit, SyntaxNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorFamily {
    Arithmetic,
    Relational,
    Logical,
    Bitwise,
    Assignment,
}

impl OperatorFamily {
    pub fn of(op: &str) -> Option<OperatorFamily> {
        Some(match op {
            "+" | "-" | "*" | "/" | "%" => OperatorFamily::Arithmetic,
            "==" | "!=" | "<" | ">" | "<=" | ">=" => OperatorFamily::Relational,
            "&&" | "||" => OperatorFamily::Logical,
            "&" | "|" | "^" | "<<" | ">>" | ">>>" => OperatorFamily::Bitwise,
            "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" | ">>=" | ">>>=" => {
                OperatorFamily::Assignment
            }
            _ => return None,
        })
    }
}

/// Children that open a nested scope: loop bodies, branches and blocks
/// belong to other statements, not to the buggy line.
fn is_nested_body(node: &SyntaxNode<'_>) -> bool {
    matches!(node.field(), Some("body" | "consequence" | "alternative"))
        || node.kind() == NodeKind::Block
        || node.grammar_kind() == "class_body"
}

/// Nodes of `stmt` that belong to the statement itself, in document order.
pub(crate) fn matchable_nodes<'a>(stmt: SyntaxNode<'a>) -> Vec<SyntaxNode<'a>> {
    let mut out = Vec::new();
    let mut stack = vec![stmt];
    while let Some(node) = stack.pop() {
        out.push(node);
        let children: Vec<_> = node.children().filter(|c| !is_nested_body(c)).collect();
        stack.extend(children.into_iter().rev());
    }
    out
}

fn looks_like_type_name(text: &str) -> bool {
    let mut chars = text.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && text.chars().any(|c| c.is_ascii_lowercase())
}

/// True when an identifier denotes a variable use (not a declaration,
/// method name, label or class-looking receiver).
pub fn is_variable_occurrence(node: &SyntaxNode<'_>) -> bool {
    if node.kind() != NodeKind::SimpleName {
        return false;
    }
    let Some(parent) = node.parent() else {
        return false;
    };
    let field = node.field();
    match parent.grammar_kind() {
        "method_invocation" => field == Some("object") && !looks_like_type_name(node.text()),
        "field_access" => field == Some("field") || !looks_like_type_name(node.text()),
        "variable_declarator" => field == Some("value"),
        "formal_parameter" | "catch_formal_parameter" | "spread_parameter" | "inferred_parameters" => false,
        "lambda_expression" => field == Some("body"),
        "labeled_statement" | "break_statement" | "continue_statement" => false,
        "method_declaration" | "constructor_declaration" | "class_declaration"
        | "interface_declaration" | "enum_declaration" | "enum_constant" => false,
        "scoped_identifier" | "annotation" | "marker_annotation" | "method_reference" => false,
        "object_creation_expression" => false,
        _ => true,
    }
}

/// Receivers that a null check could guard: call targets, field-access
/// objects and indexed arrays.
pub(crate) fn is_dereferenced(node: &SyntaxNode<'_>) -> bool {
    let Some(parent) = node.parent() else {
        return false;
    };
    let role = matches!(
        (parent.grammar_kind(), node.field()),
        ("method_invocation", Some("object")) | ("field_access", Some("object")) | ("array_access", Some("array"))
    );
    if !role {
        return false;
    }
    match node.grammar_kind() {
        "this" | "super" => false,
        "identifier" => !looks_like_type_name(node.text()),
        "field_access" | "method_invocation" | "array_access" | "parenthesized_expression" => true,
        _ => false,
    }
}

pub(crate) fn is_logical_infix(node: &SyntaxNode<'_>) -> bool {
    node.kind() == NodeKind::ConditionalExpression
        && node
            .operator()
            .map(|op| matches!(op.text(), "&&" | "||"))
            .unwrap_or(false)
}

pub(crate) fn is_boolean_expression(node: &SyntaxNode<'_>) -> bool {
    if node.grammar_kind() == "parenthesized_expression" || !node.is_named() {
        return false;
    }
    match node.kind() {
        NodeKind::ConditionalExpression | NodeKind::InstanceofExpression => true,
        NodeKind::PrefixExpression => node.operator().map(|o| o.text() == "!").unwrap_or(false),
        _ => node.is_condition(),
    }
}

pub(crate) fn is_chained_infix(node: &SyntaxNode<'_>) -> bool {
    if !matches!(node.kind(), NodeKind::InfixExpression | NodeKind::ConditionalExpression) {
        return false;
    }
    let nested = |field| {
        node.child_by_field(field)
            .map(|c| c.unparenthesized().grammar_kind() == "binary_expression")
            .unwrap_or(false)
    };
    nested("left") || nested("right")
}

pub(crate) fn is_mutable_operator(node: &SyntaxNode<'_>) -> bool {
    if node.kind() != NodeKind::Operator {
        return false;
    }
    match node.parent().map(|p| p.grammar_kind()) {
        Some("binary_expression") => true,
        Some("assignment_expression") => node.text() != "=",
        _ => false,
    }
}

fn matches(template: TemplateId, node: &SyntaxNode<'_>) -> bool {
    use TemplateId::*;
    let kind = node.kind();
    match template {
        T1 => kind == NodeKind::CastExpression,
        T2Remove | T2Update => is_logical_infix(node),
        T2Add | T2ReplaceWhole => is_boolean_expression(node),
        T3 => {
            (kind == NodeKind::VariableDeclaration || kind == NodeKind::CastExpression)
                && node.child_by_field("type").is_some()
        }
        T4 => kind.is_literal(),
        T5Name => kind == NodeKind::MethodInvocation,
        T5ArgInsert => {
            kind == NodeKind::ArgumentList
                && node.parent().map(|p| p.kind() == NodeKind::MethodInvocation).unwrap_or(false)
        }
        T5ArgRemove | T5ArgReplace => {
            matches(T5ArgInsert, node) && node.named_children().next().is_some()
        }
        T6Skip | T6Return | T6Continue | T6Throw => is_dereferenced(node),
        T6Reassign => {
            is_dereferenced(node) && matches!(node.grammar_kind(), "identifier" | "field_access")
        }
        T7Priority => is_chained_infix(node),
        T7Operator => is_mutable_operator(node),
        T8 => kind == NodeKind::ArrayAccess,
        T9 => kind == NodeKind::ReturnStatement && node.named_children().next().is_some(),
        T12 => is_variable_occurrence(node),
        T10Return | T10TryCatch | T10IfWrap | T10Simple | T11 | T13 => false,
    }
}

/// Matches the catalog against the statement on `buggy_line`.
///
/// Sites come out in `order`, ties broken by document order of the matched
/// node. Universal templates anchor on the statement node.
pub fn select_templates(
    unit: &ParsedUnit,
    buggy_line: usize,
    order: &TemplateOrder,
) -> Result<Vec<MatchSite>, TemplateError> {
    let stmt = unit.statement_at(buggy_line)?;
    let nodes = matchable_nodes(stmt);
    let mut sites = Vec::new();
    for &template in order.ids() {
        if template.is_universal() {
            sites.push(MatchSite {
                template,
                node: stmt.id(),
                anchor_line: buggy_line,
                hunk_end: None,
            });
            continue;
        }
        for node in &nodes {
            if matches(template, node) {
                sites.push(MatchSite {
                    template,
                    node: node.id(),
                    anchor_line: buggy_line,
                    hunk_end: None,
                });
            }
        }
    }
    // `order.ids()` already drives the outer loop and `nodes` is in
    // document order, so the list is sorted.
    Ok(sites)
}
