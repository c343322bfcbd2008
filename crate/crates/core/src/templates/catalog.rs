use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ast::{LiteralKind, NodeKind};

/// One sub-template of the closed fix-template catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateId {
    T1,
    T2Remove,
    T2Update,
    T2Add,
    T2ReplaceWhole,
    T3,
    T4,
    T5Name,
    T5ArgInsert,
    T5ArgRemove,
    T5ArgReplace,
    T6Skip,
    T6Return,
    T6Continue,
    T6Throw,
    T6Reassign,
    T7Priority,
    T7Operator,
    T8,
    T9,
    T10Return,
    T10TryCatch,
    T10IfWrap,
    T10Simple,
    T11,
    T12,
    T13,
}

impl TemplateId {
    pub const ALL: [TemplateId; 27] = [
        TemplateId::T1,
        TemplateId::T2Remove,
        TemplateId::T2Update,
        TemplateId::T2Add,
        TemplateId::T2ReplaceWhole,
        TemplateId::T3,
        TemplateId::T4,
        TemplateId::T5Name,
        TemplateId::T5ArgInsert,
        TemplateId::T5ArgRemove,
        TemplateId::T5ArgReplace,
        TemplateId::T6Skip,
        TemplateId::T6Return,
        TemplateId::T6Continue,
        TemplateId::T6Throw,
        TemplateId::T6Reassign,
        TemplateId::T7Priority,
        TemplateId::T7Operator,
        TemplateId::T8,
        TemplateId::T9,
        TemplateId::T10Return,
        TemplateId::T10TryCatch,
        TemplateId::T10IfWrap,
        TemplateId::T10Simple,
        TemplateId::T11,
        TemplateId::T12,
        TemplateId::T13,
    ];

    /// Major template number, 1 through 13.
    pub fn major(self) -> u8 {
        use TemplateId::*;
        match self {
            T1 => 1,
            T2Remove | T2Update | T2Add | T2ReplaceWhole => 2,
            T3 => 3,
            T4 => 4,
            T5Name | T5ArgInsert | T5ArgRemove | T5ArgReplace => 5,
            T6Skip | T6Return | T6Continue | T6Throw | T6Reassign => 6,
            T7Priority | T7Operator => 7,
            T8 => 8,
            T9 => 9,
            T10Return | T10TryCatch | T10IfWrap | T10Simple => 10,
            T11 => 11,
            T12 => 12,
            T13 => 13,
        }
    }

    pub fn tag(self) -> &'static str {
        use TemplateId::*;
        match self {
            T1 => "T1",
            T2Remove => "T2.remove",
            T2Update => "T2.update",
            T2Add => "T2.add",
            T2ReplaceWhole => "T2.replace-whole",
            T3 => "T3",
            T4 => "T4",
            T5Name => "T5.name",
            T5ArgInsert => "T5.arg-insert",
            T5ArgRemove => "T5.arg-remove",
            T5ArgReplace => "T5.arg-replace",
            T6Skip => "T6.skip",
            T6Return => "T6.return",
            T6Continue => "T6.continue",
            T6Throw => "T6.throw",
            T6Reassign => "T6.reassign",
            T7Priority => "T7.priority",
            T7Operator => "T7.operator",
            T8 => "T8",
            T9 => "T9",
            T10Return => "T10.return",
            T10TryCatch => "T10.trycatch",
            T10IfWrap => "T10.if-wrap",
            T10Simple => "T10.simple",
            T11 => "T11",
            T12 => "T12",
            T13 => "T13",
        }
    }

    pub fn description(self) -> &'static str {
        use TemplateId::*;
        match self {
            T1 => "wrap the statement in an instanceof check for its cast expression",
            T2Remove => "drop one operand of a logical && / || condition",
            T2Update => "replace one operand of a logical condition with a mask",
            T2Add => "append a masked sub-condition to a boolean expression",
            T2ReplaceWhole => "replace a whole boolean expression with a mask",
            T3 => "mask the declared type of a variable or the target type of a cast",
            T4 => "mask a literal",
            T5Name => "mask the name of an invoked method",
            T5ArgInsert => "append a masked argument to a call",
            T5ArgRemove => "remove one argument of a call",
            T5ArgReplace => "mask one argument of a call",
            T6Skip => "guard the statement with `if (exp != null)`",
            T6Return => "insert `if (exp == null) { return <mask>; }` before the statement",
            T6Continue => "insert `if (exp == null) { continue; }` before the statement",
            T6Throw => "insert `if (exp == null) { throw new IllegalArgumentException(); }`",
            T6Reassign => "insert `if (exp == null) { exp = <mask>; }` before the statement",
            T7Priority => "move the parentheses of a two-operator infix chain",
            T7Operator => "mask one binary or compound-assignment operator",
            T8 => "guard an array access with `if (index < array.length)`",
            T9 => "mask the returned expression",
            T10Return => "insert `return <mask>;` before the statement",
            T10TryCatch => "wrap the statement in try { } catch (Exception e) {}",
            T10IfWrap => "wrap the statement in `if (<mask>)`",
            T10Simple => "insert a masked statement before the statement",
            T11 => "delete the statement",
            T12 => "mask one variable occurrence",
            T13 => "move the statement to another position in its block",
        }
    }

    /// Templates applied to every statement without inspecting its AST.
    pub fn is_universal(self) -> bool {
        use TemplateId::*;
        matches!(
            self,
            T10Return | T10TryCatch | T10IfWrap | T10Simple | T11 | T13
        )
    }

    /// Node kinds a match site of this template may point at. Empty for
    /// universal templates, which anchor on the statement itself.
    pub fn required_kinds(self) -> &'static [NodeKind] {
        use NodeKind as K;
        use TemplateId::*;
        match self {
            T1 => &[K::CastExpression],
            T2Remove | T2Update => &[K::ConditionalExpression],
            T2Add | T2ReplaceWhole => &[
                K::ConditionalExpression,
                K::InstanceofExpression,
                K::PrefixExpression,
                K::SimpleName,
                K::MethodInvocation,
                K::Literal(LiteralKind::Boolean),
                K::ArrayAccess,
                K::CastExpression,
                K::Expression,
            ],
            T3 => &[K::VariableDeclaration, K::CastExpression],
            T4 => &[
                K::Literal(LiteralKind::Number),
                K::Literal(LiteralKind::String),
                K::Literal(LiteralKind::Char),
                K::Literal(LiteralKind::Boolean),
                K::Literal(LiteralKind::Null),
            ],
            T5Name => &[K::MethodInvocation],
            T5ArgInsert | T5ArgRemove | T5ArgReplace => &[K::ArgumentList],
            T6Skip | T6Return | T6Continue | T6Throw | T6Reassign => {
                &[K::SimpleName, K::Expression, K::MethodInvocation, K::ArrayAccess]
            }
            T7Priority => &[K::InfixExpression, K::ConditionalExpression],
            T7Operator => &[K::Operator],
            T8 => &[K::ArrayAccess],
            T9 => &[K::ReturnStatement],
            T12 => &[K::SimpleName],
            T10Return | T10TryCatch | T10IfWrap | T10Simple | T11 | T13 => &[],
        }
    }

    pub fn subs_of(major: u8) -> impl Iterator<Item = TemplateId> {
        Self::ALL.into_iter().filter(move |t| t.major() == major)
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown template `{0}`")]
pub struct UnknownTemplate(pub String);

impl FromStr for TemplateId {
    type Err = UnknownTemplate;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .into_iter()
            .find(|t| t.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownTemplate(s.to_string()))
    }
}

impl Serialize for TemplateId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for TemplateId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A template filter as given on the command line: either a whole major
/// (`T5`) or one sub-template (`T5.name`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateFilter {
    Major(u8),
    Sub(TemplateId),
}

impl TemplateFilter {
    pub fn accepts(self, id: TemplateId) -> bool {
        match self {
            TemplateFilter::Major(m) => id.major() == m,
            TemplateFilter::Sub(s) => s == id,
        }
    }
}

impl fmt::Display for TemplateFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateFilter::Major(m) => write!(f, "T{m}"),
            TemplateFilter::Sub(id) => write!(f, "{id}"),
        }
    }
}

impl FromStr for TemplateFilter {
    type Err = UnknownTemplate;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(id) = s.parse::<TemplateId>() {
            if id.tag().contains('.') || !TemplateId::ALL.iter().any(|t| t.major() == id.major() && *t != id) {
                return Ok(TemplateFilter::Sub(id));
            }
        }
        let digits = s
            .strip_prefix('T')
            .or_else(|| s.strip_prefix('t'))
            .ok_or_else(|| UnknownTemplate(s.to_string()))?;
        match digits.parse::<u8>() {
            Ok(m) if (1..=13).contains(&m) => Ok(TemplateFilter::Major(m)),
            _ => Err(UnknownTemplate(s.to_string())),
        }
    }
}

/// Enumeration priority over the full catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemplateOrder(Vec<TemplateId>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("template order must be a permutation of the catalog: {0}")]
pub struct InvalidOrder(pub String);

/// Replacement-style templates first, deletion last.
pub const DEFAULT_MAJOR_ORDER: [u8; 13] = [5, 2, 12, 4, 7, 9, 3, 6, 1, 8, 10, 13, 11];

impl TemplateOrder {
    pub fn new(ids: Vec<TemplateId>) -> Result<Self, InvalidOrder> {
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != ids.len() {
            return Err(InvalidOrder("duplicate template".into()));
        }
        if sorted.as_slice() != TemplateId::ALL.as_slice() {
            return Err(InvalidOrder(format!("expected {} templates, got {}", TemplateId::ALL.len(), ids.len())));
        }
        Ok(TemplateOrder(ids))
    }

    /// Expands a major-level order; sub-templates keep catalog order.
    pub fn from_majors(majors: &[u8]) -> Result<Self, InvalidOrder> {
        let ids = majors.iter().flat_map(|&m| TemplateId::subs_of(m)).collect();
        Self::new(ids)
    }

    pub fn ids(&self) -> &[TemplateId] {
        &self.0
    }

    pub fn position(&self, id: TemplateId) -> usize {
        self.0.iter().position(|&t| t == id).unwrap_or(usize::MAX)
    }
}

impl Default for TemplateOrder {
    fn default() -> Self {
        TemplateOrder::from_majors(&DEFAULT_MAJOR_ORDER).expect("default order is a permutation")
    }
}
