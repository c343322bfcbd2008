//! tree-sitter-java backed arena construction.

use std::sync::OnceLock;

use tree_sitter::{Language, Node, Parser, TreeCursor};

use super::{position_in, AstError, LiteralKind, NodeData, NodeId, NodeKind, Span};

const BOOLEAN_OPERATORS: &[&str] = &["==", "!=", "<", ">", "<=", ">=", "&&", "||"];

fn language() -> &'static Language {
    static LANGUAGE: OnceLock<Language> = OnceLock::new();
    LANGUAGE.get_or_init(|| tree_sitter_java::LANGUAGE.into())
}

fn node_kind(node: &Node<'_>) -> &'static str {
    language().node_kind_for_id(node.kind_id()).unwrap_or("ERROR")
}

pub(super) fn build_arena(source: &str, line_starts: &[usize]) -> Result<Vec<NodeData>, AstError> {
    let mut parser = Parser::new();
    parser
        .set_language(language())
        .map_err(|e| AstError::Grammar(e.to_string()))?;
    let tree = parser
        .parse(source, None)
        .ok_or_else(|| AstError::Grammar("parser returned no tree".into()))?;

    let mut nodes: Vec<NodeData> = Vec::new();
    let mut cursor = tree.walk();
    // Stack of arena indices for the current ancestry.
    let mut ancestry: Vec<usize> = Vec::new();
    loop {
        let node = cursor.node();
        let parent = ancestry.last().copied();
        let id = nodes.len();
        let (byte_start, byte_end) = if parent.is_none() {
            (0, source.len())
        } else {
            (node.start_byte(), node.end_byte())
        };
        let parent_kind = parent.map(|p| nodes[p].grammar_kind);
        nodes.push(NodeData {
            kind: classify(&node, cursor_field(&cursor), parent_kind),
            span: Span {
                start: position_in(line_starts, byte_start),
                end: position_in(line_starts, byte_end),
                byte_start,
                byte_end,
            },
            grammar_kind: node_kind(&node),
            field: cursor_field(&cursor),
            named: node.is_named(),
            parent: parent.map(|p| NodeId(p as u32)),
            children: Vec::new(),
        });
        if let Some(p) = parent {
            nodes[p].children.push(NodeId(id as u32));
        }

        if cursor.goto_first_child() {
            ancestry.push(id);
            continue;
        }
        loop {
            if cursor.goto_next_sibling() {
                break;
            }
            if !cursor.goto_parent() {
                return Ok(nodes);
            }
            ancestry.pop();
        }
    }
}

fn cursor_field(cursor: &TreeCursor<'_>) -> Option<&'static str> {
    let id = cursor.field_id()?;
    language().field_name_for_id(id.get())
}

fn classify(node: &Node<'_>, field: Option<&str>, parent_kind: Option<&str>) -> NodeKind {
    if node.is_error() || node.is_missing() {
        return NodeKind::Error;
    }
    let kind = node.kind();
    if !node.is_named() {
        return if field == Some("operator") {
            NodeKind::Operator
        } else {
            NodeKind::Token
        };
    }
    match kind {
        "method_invocation" => NodeKind::MethodInvocation,
        "binary_expression" => {
            let op = node
                .child_by_field_name("operator")
                .map(|o| o.kind())
                .unwrap_or_default();
            if BOOLEAN_OPERATORS.contains(&op) {
                NodeKind::ConditionalExpression
            } else {
                NodeKind::InfixExpression
            }
        }
        "unary_expression" => NodeKind::PrefixExpression,
        "update_expression" => {
            let prefix = node
                .child(0)
                .map(|c| matches!(c.kind(), "++" | "--"))
                .unwrap_or(false);
            if prefix {
                NodeKind::PrefixExpression
            } else {
                NodeKind::Expression
            }
        }
        "cast_expression" => NodeKind::CastExpression,
        "instanceof_expression" => NodeKind::InstanceofExpression,
        "local_variable_declaration" | "field_declaration" | "constant_declaration" => {
            NodeKind::VariableDeclaration
        }
        "assignment_expression" => NodeKind::Assignment,
        "decimal_integer_literal"
        | "hex_integer_literal"
        | "octal_integer_literal"
        | "binary_integer_literal"
        | "decimal_floating_point_literal"
        | "hex_floating_point_literal" => NodeKind::Literal(LiteralKind::Number),
        "string_literal" | "text_block" => NodeKind::Literal(LiteralKind::String),
        "character_literal" => NodeKind::Literal(LiteralKind::Char),
        "true" | "false" => NodeKind::Literal(LiteralKind::Boolean),
        "null_literal" => NodeKind::Literal(LiteralKind::Null),
        "return_statement" => NodeKind::ReturnStatement,
        "if_statement" => NodeKind::IfStatement,
        "explicit_constructor_invocation" => NodeKind::Statement,
        "switch_expression"
            if matches!(
                parent_kind,
                Some("block" | "constructor_body" | "switch_block_statement_group")
            ) =>
        {
            NodeKind::Statement
        }
        k if k.ends_with("_statement") => NodeKind::Statement,
        "identifier" => NodeKind::SimpleName,
        "array_access" => NodeKind::ArrayAccess,
        "method_declaration" | "constructor_declaration" | "compact_constructor_declaration" => {
            NodeKind::MethodDeclaration
        }
        "block" | "constructor_body" => NodeKind::Block,
        "type_identifier" | "integral_type" | "floating_point_type" | "boolean_type"
        | "void_type" | "generic_type" | "array_type" | "scoped_type_identifier" => {
            NodeKind::TypeName
        }
        "argument_list" => NodeKind::ArgumentList,
        "line_comment" | "block_comment" => NodeKind::Comment,
        "string_fragment" | "escape_sequence" | "multiline_string_fragment" => NodeKind::Token,
        k if k.ends_with("_expression")
            || matches!(
                k,
                "field_access"
                    | "this"
                    | "super"
                    | "class_literal"
                    | "method_reference"
                    | "array_initializer"
            ) =>
        {
            NodeKind::Expression
        }
        _ => NodeKind::Structure,
    }
}
