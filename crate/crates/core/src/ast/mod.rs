//! Syntax trees for buggy source files.
//!
//! A [`ParsedUnit`] owns the source text and a flattened, pre-order arena of
//! nodes. Node ids therefore follow document order, which the template
//! engine relies on when it breaks ties between match sites.
//!
//! The grammar backend is tree-sitter; the rest of the crate only sees the
//! [`NodeKind`] abstraction plus the grammar's field names.

mod java;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AstError {
    #[error("unsupported language `{0}`")]
    UnsupportedLanguage(String),
    #[error("source is not valid UTF-8: {0}")]
    UnreadableSource(String),
    #[error("source is empty")]
    EmptySource,
    #[error("line {line} is outside the file (1..={lines})")]
    LineOutOfRange { line: usize, lines: usize },
    #[error("no statement on line {0}")]
    NoStatementAtLine(usize),
    #[error("line {0} is not inside a method")]
    NoEnclosingMethod(usize),
    #[error("grammar backend failed: {0}")]
    Grammar(String),
}

/// Source languages with a grammar backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    #[default]
    Java,
}

impl FromStr for Language {
    type Err = AstError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "java" => Ok(Language::Java),
            other => Err(AstError::UnsupportedLanguage(other.to_string())),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Language::Java => f.write_str("java"),
        }
    }
}

/// 1-based line, 0-based byte column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SourcePosition {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub start: SourcePosition,
    pub end: SourcePosition,
    pub byte_start: usize,
    pub byte_end: usize,
}

impl Span {
    pub fn bytes(&self) -> Range<usize> {
        self.byte_start..self.byte_end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.byte_start <= other.byte_start && other.byte_end <= self.byte_end
    }

    pub fn covers_line(&self, line: usize) -> bool {
        self.start.line <= line && line <= self.end.line
    }

    pub fn is_empty(&self) -> bool {
        self.byte_start == self.byte_end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiteralKind {
    Number,
    String,
    Char,
    Boolean,
    Null,
}

/// Node classification consumed by the template engine.
///
/// Grammar constructs with no dedicated variant fall into `Expression`,
/// `Structure` (declarations, parameter lists, class bodies), `Token`
/// (punctuation and keywords), `Comment`, or `Error` for regions the
/// error-tolerant parser could not make sense of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    MethodInvocation,
    InfixExpression,
    PrefixExpression,
    /// Boolean-valued infix expression (relational or logical operator).
    ConditionalExpression,
    CastExpression,
    InstanceofExpression,
    VariableDeclaration,
    Assignment,
    Literal(LiteralKind),
    ReturnStatement,
    IfStatement,
    Statement,
    SimpleName,
    ArrayAccess,
    MethodDeclaration,
    Block,
    Operator,
    TypeName,
    ArgumentList,
    Expression,
    Structure,
    Comment,
    Token,
    Error,
}

impl NodeKind {
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::Statement
                | NodeKind::ReturnStatement
                | NodeKind::IfStatement
                | NodeKind::VariableDeclaration
        )
    }

    pub fn is_literal(self) -> bool {
        matches!(self, NodeKind::Literal(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
pub(crate) struct NodeData {
    pub(crate) kind: NodeKind,
    pub(crate) span: Span,
    pub(crate) grammar_kind: &'static str,
    pub(crate) field: Option<&'static str>,
    pub(crate) named: bool,
    pub(crate) parent: Option<NodeId>,
    pub(crate) children: Vec<NodeId>,
}

/// A parsed source file. Immutable once built.
#[derive(Debug, Clone)]
pub struct ParsedUnit {
    source: String,
    language: Language,
    nodes: Vec<NodeData>,
    line_starts: Vec<usize>,
}

pub fn parse(source: &str, language: Language) -> Result<ParsedUnit, AstError> {
    if source.is_empty() {
        return Err(AstError::EmptySource);
    }
    let line_starts = compute_line_starts(source);
    let nodes = match language {
        Language::Java => java::build_arena(source, &line_starts)?,
    };
    Ok(ParsedUnit {
        source: source.to_string(),
        language,
        nodes,
        line_starts,
    })
}

pub fn parse_bytes(bytes: &[u8], language: Language) -> Result<ParsedUnit, AstError> {
    let text = std::str::from_utf8(bytes).map_err(|e| AstError::UnreadableSource(e.to_string()))?;
    parse(text, language)
}

fn compute_line_starts(source: &str) -> Vec<usize> {
    let mut starts = vec![0];
    for (i, b) in source.bytes().enumerate() {
        if b == b'\n' && i + 1 < source.len() {
            starts.push(i + 1);
        }
    }
    starts
}

pub(crate) fn position_in(line_starts: &[usize], byte: usize) -> SourcePosition {
    let idx = line_starts.partition_point(|&s| s <= byte).max(1) - 1;
    SourcePosition {
        line: idx + 1,
        column: byte - line_starts[idx],
    }
}

impl ParsedUnit {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn line_starts(&self) -> &[usize] {
        &self.line_starts
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    pub fn root(&self) -> SyntaxNode<'_> {
        self.node(NodeId(0))
    }

    pub fn node(&self, id: NodeId) -> SyntaxNode<'_> {
        SyntaxNode { unit: self, id }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// All nodes in document (pre-)order.
    pub fn nodes(&self) -> impl Iterator<Item = SyntaxNode<'_>> + '_ {
        (0..self.nodes.len()).map(move |i| self.node(NodeId(i as u32)))
    }

    pub fn position(&self, byte: usize) -> SourcePosition {
        position_in(&self.line_starts, byte)
    }

    fn check_line(&self, line: usize) -> Result<(), AstError> {
        if line == 0 || line > self.line_count() {
            return Err(AstError::LineOutOfRange {
                line,
                lines: self.line_count(),
            });
        }
        Ok(())
    }

    /// Byte range of `line` without its terminating newline.
    pub fn line_range(&self, line: usize) -> Range<usize> {
        let start = self.line_starts[line - 1];
        let end = self
            .line_starts
            .get(line)
            .map(|&next| next - 1)
            .unwrap_or_else(|| self.source.trim_end_matches('\n').len().max(start));
        let end = if end > start && self.source.as_bytes()[end - 1] == b'\r' {
            end - 1
        } else {
            end
        };
        start..end
    }

    /// Byte range of `line` including the newline, if any.
    pub fn full_line_range(&self, line: usize) -> Range<usize> {
        let start = self.line_starts[line - 1];
        let end = self
            .line_starts
            .get(line)
            .copied()
            .unwrap_or(self.source.len());
        start..end
    }

    pub fn line_text(&self, line: usize) -> &str {
        &self.source[self.line_range(line)]
    }

    pub fn has_errors(&self) -> bool {
        self.nodes.iter().any(|n| n.kind == NodeKind::Error)
    }

    pub fn error_nodes(&self) -> impl Iterator<Item = SyntaxNode<'_>> + '_ {
        self.nodes().filter(|n| n.kind() == NodeKind::Error)
    }

    /// Leaf tokens (no children), comments included.
    pub fn leaves(&self) -> impl Iterator<Item = SyntaxNode<'_>> + '_ {
        self.nodes().filter(|n| n.child_count() == 0 && !n.span().is_empty())
    }

    /// True when the line holds at least one non-comment token.
    pub fn line_has_code(&self, line: usize) -> bool {
        let range = self.line_range(line);
        if self.source[range.clone()].trim().is_empty() {
            return false;
        }
        self.leaves().any(|leaf| {
            let span = leaf.span();
            leaf.kind() != NodeKind::Comment
                && span.byte_start < range.end
                && span.byte_end > range.start
                && !self.source[span.byte_start.max(range.start)..span.byte_end.min(range.end)]
                    .trim()
                    .is_empty()
        })
    }

    /// The smallest statement whose span covers `line`; the first in
    /// document order when several statements share the line.
    pub fn statement_at(&self, line: usize) -> Result<SyntaxNode<'_>, AstError> {
        self.check_line(line)?;
        if !self.line_has_code(line) {
            return Err(AstError::NoStatementAtLine(line));
        }
        let covering: Vec<SyntaxNode<'_>> = self
            .nodes()
            .filter(|n| n.kind().is_statement() && n.span().covers_line(line))
            .collect();
        covering
            .iter()
            .find(|candidate| {
                !covering
                    .iter()
                    .any(|other| other.id != candidate.id && candidate.span().contains(&other.span()) && other.is_descendant_of(**candidate))
            })
            .copied()
            .ok_or(AstError::NoStatementAtLine(line))
    }

    /// The innermost method (or constructor) declaration covering `line`.
    pub fn enclosing_method(&self, line: usize) -> Result<SyntaxNode<'_>, AstError> {
        self.check_line(line)?;
        self.nodes()
            .filter(|n| n.kind() == NodeKind::MethodDeclaration && n.span().covers_line(line))
            .last()
            .ok_or(AstError::NoEnclosingMethod(line))
    }

    /// Line range `[first, last]` of a span.
    pub fn lines_of(&self, span: &Span) -> (usize, usize) {
        let last = if span.byte_end > span.byte_start {
            self.position(span.byte_end - 1).line
        } else {
            span.start.line
        };
        (span.start.line, last)
    }
}

/// Borrowed handle onto one node of a [`ParsedUnit`].
#[derive(Clone, Copy)]
pub struct SyntaxNode<'a> {
    unit: &'a ParsedUnit,
    id: NodeId,
}

impl PartialEq for SyntaxNode<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.unit, other.unit) && self.id == other.id
    }
}

impl Eq for SyntaxNode<'_> {}

impl fmt::Debug for SyntaxNode<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SyntaxNode")
            .field("id", &self.id.0)
            .field("kind", &self.kind())
            .field("grammar", &self.grammar_kind())
            .field("lines", &(self.span().start.line, self.span().end.line))
            .field("text", &self.text())
            .finish()
    }
}

impl<'a> SyntaxNode<'a> {
    fn data(&self) -> &'a NodeData {
        &self.unit.nodes[self.id.index()]
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn unit(&self) -> &'a ParsedUnit {
        self.unit
    }

    pub fn kind(&self) -> NodeKind {
        self.data().kind
    }

    pub fn span(&self) -> Span {
        self.data().span
    }

    pub fn text(&self) -> &'a str {
        &self.unit.source[self.data().span.bytes()]
    }

    /// Raw node type name from the grammar (e.g. `method_invocation`).
    pub fn grammar_kind(&self) -> &'static str {
        self.data().grammar_kind
    }

    /// Field name this node occupies in its parent, if any.
    pub fn field(&self) -> Option<&'static str> {
        self.data().field
    }

    pub fn is_named(&self) -> bool {
        self.data().named
    }

    pub fn parent(&self) -> Option<SyntaxNode<'a>> {
        self.data().parent.map(|id| self.unit.node(id))
    }

    pub fn child_count(&self) -> usize {
        self.data().children.len()
    }

    pub fn children(&self) -> impl Iterator<Item = SyntaxNode<'a>> + 'a {
        let unit = self.unit;
        self.data().children.iter().map(move |&id| unit.node(id))
    }

    pub fn named_children(&self) -> impl Iterator<Item = SyntaxNode<'a>> + 'a {
        self.children()
            .filter(|c| c.is_named() && c.kind() != NodeKind::Comment)
    }

    pub fn child_by_field(&self, field: &str) -> Option<SyntaxNode<'a>> {
        self.children().find(|c| c.field() == Some(field))
    }

    pub fn children_by_field(&self, field: &'a str) -> impl Iterator<Item = SyntaxNode<'a>> + 'a {
        self.children().filter(move |c| c.field() == Some(field))
    }

    /// Pre-order traversal of this subtree, the node itself first.
    pub fn descendants(&self) -> impl Iterator<Item = SyntaxNode<'a>> + 'a {
        let mut stack = vec![*self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            let data = node.data();
            stack.extend(data.children.iter().rev().map(|&id| node.unit.node(id)));
            Some(node)
        })
    }

    pub fn ancestors(&self) -> impl Iterator<Item = SyntaxNode<'a>> + 'a {
        let mut current = self.parent();
        std::iter::from_fn(move || {
            let node = current?;
            current = node.parent();
            Some(node)
        })
    }

    pub fn is_descendant_of(&self, other: SyntaxNode<'_>) -> bool {
        self.ancestors().any(|a| a.id == other.id)
    }

    /// Strips redundant parentheses: `((x))` yields `x`.
    pub fn unparenthesized(&self) -> SyntaxNode<'a> {
        let mut node = *self;
        while node.grammar_kind() == "parenthesized_expression" {
            match node.named_children().next() {
                Some(inner) => node = inner,
                None => break,
            }
        }
        node
    }

    /// Operator token of an infix, prefix or assignment expression.
    pub fn operator(&self) -> Option<SyntaxNode<'a>> {
        self.child_by_field("operator")
    }

    /// True for expressions in a condition position (`if`, `while`,
    /// `do`, `for` and ternary conditions).
    pub fn is_condition(&self) -> bool {
        if self.grammar_kind() == "parenthesized_expression" {
            return false;
        }
        if self.field() == Some("condition") {
            return true;
        }
        matches!(self.parent(), Some(p) if p.grammar_kind() == "parenthesized_expression" && p.field() == Some("condition"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAY_BE_STRING: &str = "class NodeUtil {\n  static boolean mayBeString(Node n, boolean recurse) {\n    if (recurse) {\n      return allResultsMatch(n, MAY_BE_STRING_PREDICATE);\n    } else {\n      return mayBeStringHelper(n);\n    }\n  }\n\n  // trailing comment\n  int field = 3;\n}\n";

    fn java(src: &str) -> ParsedUnit {
        parse(src, Language::Java).unwrap()
    }

    #[test]
    fn return_statement_holds_simple_name() {
        let unit = java("class A { int f(int x) {\n return x;\n } }");
        let stmt = unit.statement_at(2).unwrap();
        assert_eq!(stmt.kind(), NodeKind::ReturnStatement);
        let names: Vec<_> = stmt
            .named_children()
            .filter(|c| c.kind() == NodeKind::SimpleName)
            .map(|c| c.text())
            .collect();
        assert_eq!(names, vec!["x"]);
    }

    #[test]
    fn if_then_branch_contains_invocation() {
        let unit = java(MAY_BE_STRING);
        let if_stmt = unit.statement_at(3).unwrap();
        assert_eq!(if_stmt.kind(), NodeKind::IfStatement);
        let then = if_stmt.child_by_field("consequence").unwrap();
        let ret = then
            .descendants()
            .find(|n| n.kind() == NodeKind::ReturnStatement)
            .unwrap();
        let call = ret
            .descendants()
            .find(|n| n.kind() == NodeKind::MethodInvocation)
            .unwrap();
        assert_eq!(call.child_by_field("name").unwrap().text(), "allResultsMatch");
    }

    #[test]
    fn blank_and_comment_lines_have_no_statement() {
        let unit = java(MAY_BE_STRING);
        assert_eq!(unit.statement_at(9), Err(AstError::NoStatementAtLine(9)));
        assert_eq!(unit.statement_at(10), Err(AstError::NoStatementAtLine(10)));
        assert!(matches!(unit.statement_at(99), Err(AstError::LineOutOfRange { .. })));
    }

    #[test]
    fn else_line_resolves_to_enclosing_if() {
        let unit = java(MAY_BE_STRING);
        let stmt = unit.statement_at(5).unwrap();
        assert_eq!(stmt.kind(), NodeKind::IfStatement);
        assert_eq!(stmt.span().start.line, 3);
    }

    #[test]
    fn field_has_no_enclosing_method() {
        let unit = java(MAY_BE_STRING);
        assert_eq!(unit.enclosing_method(11), Err(AstError::NoEnclosingMethod(11)));
        let stmt = unit.statement_at(11).unwrap();
        assert_eq!(stmt.kind(), NodeKind::VariableDeclaration);
        let method = unit.enclosing_method(4).unwrap();
        assert!(method.text().starts_with("static boolean mayBeString"));
    }

    #[test]
    fn lambda_body_resolves_to_outer_method() {
        let src = "class A {\n  void run() {\n    Runnable r = () -> {\n      go();\n    };\n  }\n}\n";
        let unit = java(src);
        let method = unit.enclosing_method(4).unwrap();
        assert_eq!(method.span().start.line, 2);
        assert_eq!(method.span().end.line, 6);
        let stmt = unit.statement_at(4).unwrap();
        assert_eq!(stmt.text(), "go();");
    }

    #[test]
    fn shared_line_returns_first_statement() {
        let unit = java("class A { void f() {\n a = 1; b = 2;\n } }");
        assert_eq!(unit.statement_at(2).unwrap().text(), "a = 1;");
    }

    #[test]
    fn literal_sub_kinds() {
        let unit = java("class A { void f() { g(1, 2.5, \"s\", 'c', true, null); } }");
        let kinds: Vec<_> = unit
            .nodes()
            .filter_map(|n| match n.kind() {
                NodeKind::Literal(k) => Some(k),
                _ => None,
            })
            .collect();
        use LiteralKind::*;
        assert_eq!(kinds, vec![Number, Number, String, Char, Boolean, Null]);
    }

    #[test]
    fn boolean_infix_is_conditional() {
        let unit = java("class A { boolean f(int u, int v) { return u * v == 0 && u > 1; } }");
        let kinds: Vec<_> = unit
            .nodes()
            .filter(|n| n.grammar_kind() == "binary_expression")
            .map(|n| (n.text(), n.kind()))
            .collect();
        assert_eq!(
            kinds,
            vec![
                ("u * v == 0 && u > 1", NodeKind::ConditionalExpression),
                ("u * v == 0", NodeKind::ConditionalExpression),
                ("u * v", NodeKind::InfixExpression),
                ("u > 1", NodeKind::ConditionalExpression),
            ]
        );
    }

    #[test]
    fn unsupported_language_and_bad_bytes() {
        assert_eq!(
            "python".parse::<Language>(),
            Err(AstError::UnsupportedLanguage("python".into()))
        );
        assert!(matches!(
            parse_bytes(&[0xff, 0xfe, 0x00], Language::Java),
            Err(AstError::UnreadableSource(_))
        ));
        assert_eq!(parse("", Language::Java).unwrap_err(), AstError::EmptySource);
    }

    #[test]
    fn line_ranges_exclude_newline() {
        let unit = java("class A {\r\n}\n");
        assert_eq!(unit.line_count(), 2);
        assert_eq!(unit.line_text(1), "class A {");
        assert_eq!(unit.line_text(2), "}");
    }
}
