//! Local donor retrieval: fills drawn only from tokens already present in
//! the buggy file.

use serde::Serialize;

use super::{FillCandidate, FillError, FillRequest, MaskFiller};
use crate::ast::{LiteralKind, NodeKind, ParsedUnit, SyntaxNode};
use crate::templates::{is_mutable_operator, MaskSlot, MaskedCandidate, OperatorFamily};

/// A donor token and the group it belongs to. `group` is `None` when the
/// grouping key is unknown (e.g. a method only seen at a call site).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Donor<K> {
    pub group: Option<K>,
    pub text: String,
}

/// Donor tokens of one file, each list in order of first occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DonorPool {
    /// Method names keyed by declared return type.
    pub method_names: Vec<Donor<String>>,
    /// Variable names keyed by declared type.
    pub variables: Vec<Donor<String>>,
    pub literals: Vec<Donor<LiteralKind>>,
    pub operators: Vec<Donor<OperatorFamily>>,
}

fn push_unique<K: PartialEq>(list: &mut Vec<Donor<K>>, group: Option<K>, text: &str) {
    if !list.iter().any(|d| d.group == group && d.text == text) {
        list.push(Donor {
            group,
            text: text.to_string(),
        });
    }
}

/// Declarations binding `(type, name)` pairs.
fn declared_variables<'a>(node: SyntaxNode<'a>) -> Vec<(&'a str, &'a str)> {
    let Some(ty) = node.child_by_field("type") else {
        return Vec::new();
    };
    match node.grammar_kind() {
        "local_variable_declaration" | "field_declaration" | "constant_declaration" => node
            .children_by_field("declarator")
            .filter_map(|d| d.child_by_field("name"))
            .map(|n| (ty.text(), n.text()))
            .collect(),
        "formal_parameter" | "enhanced_for_statement" | "resource" => {
            node.child_by_field("name").map(|n| vec![(ty.text(), n.text())]).unwrap_or_default()
        }
        _ => Vec::new(),
    }
}

impl DonorPool {
    pub fn build(unit: &ParsedUnit) -> DonorPool {
        let mut pool = DonorPool::default();
        // Method names ranked by the position of the name token (a call's
        // node starts at its receiver); a name's group is its declared
        // return type(s), or unknown if never declared.
        let mut method_seen: Vec<(usize, &str)> = Vec::new();
        let mut declared: Vec<(&str, &str)> = Vec::new();
        for node in unit.nodes() {
            match node.kind() {
                NodeKind::MethodDeclaration if node.grammar_kind() == "method_declaration" => {
                    if let (Some(name), Some(ty)) = (node.child_by_field("name"), node.child_by_field("type")) {
                        method_seen.push((name.span().byte_start, name.text()));
                        declared.push((name.text(), ty.text()));
                    }
                }
                NodeKind::MethodInvocation => {
                    if let Some(name) = node.child_by_field("name") {
                        method_seen.push((name.span().byte_start, name.text()));
                    }
                }
                NodeKind::Literal(kind) => push_unique(&mut pool.literals, Some(kind), node.text()),
                NodeKind::Operator if is_mutable_operator(&node) => {
                    push_unique(&mut pool.operators, OperatorFamily::of(node.text()), node.text());
                }
                _ => {}
            }
            for (ty, name) in declared_variables(node) {
                push_unique(&mut pool.variables, Some(ty.to_string()), name);
            }
        }
        method_seen.sort_by_key(|&(at, _)| at);
        let mut method_order: Vec<&str> = Vec::new();
        for (_, name) in method_seen {
            if !method_order.contains(&name) {
                method_order.push(name);
            }
        }
        for name in method_order {
            let types: Vec<&str> = declared.iter().filter(|(n, _)| *n == name).map(|(_, t)| *t).collect();
            if types.is_empty() {
                push_unique(&mut pool.method_names, None, name);
            }
            for ty in types {
                push_unique(&mut pool.method_names, Some(ty.to_string()), name);
            }
        }
        pool
    }

    fn method_types(&self, name: &str) -> Vec<&str> {
        self.method_names
            .iter()
            .filter(|d| d.text == name)
            .filter_map(|d| d.group.as_deref())
            .collect()
    }

    fn variable_types(&self, name: &str) -> Vec<&str> {
        self.variables
            .iter()
            .filter(|d| d.text == name)
            .filter_map(|d| d.group.as_deref())
            .collect()
    }

    /// Donor texts compatible with `slot`, best first, excluding the
    /// masked-out original.
    pub fn compatible(&self, slot: &MaskSlot) -> Vec<String> {
        fn typed(list: &[Donor<String>], wanted: &[&str], exclude: &str) -> Vec<String> {
            let mut out: Vec<String> = Vec::new();
            for d in list {
                let fits = wanted.is_empty() || d.group.as_deref().is_none_or(|g| wanted.contains(&g));
                if fits && d.text != exclude && !out.contains(&d.text) {
                    out.push(d.text.clone());
                }
            }
            out
        }
        match slot {
            MaskSlot::MethodName { callee } => typed(&self.method_names, &self.method_types(callee), callee),
            MaskSlot::Variable { name } => typed(&self.variables, &self.variable_types(name), name),
            MaskSlot::Literal { kind } => self
                .literals
                .iter()
                .filter(|d| d.group == Some(*kind))
                .map(|d| d.text.clone())
                .collect(),
            MaskSlot::Operator { family } => self
                .operators
                .iter()
                .filter(|d| d.group == Some(*family))
                .map(|d| d.text.clone())
                .collect(),
            _ => Vec::new(),
        }
    }
}

pub fn donor_fill(
    request: &FillRequest,
    pool: &DonorPool,
    candidate: &MaskedCandidate,
) -> Result<Vec<FillCandidate>, FillError> {
    request.require_single_mask()?;
    let slot = candidate.slot.as_ref().ok_or(FillError::EmptyPool)?;
    let donors: Vec<String> = pool
        .compatible(slot)
        .into_iter()
        .filter(|d| *d != candidate.original_fragment)
        .take(request.beam_size)
        .collect();
    if donors.is_empty() {
        return Err(FillError::EmptyPool);
    }
    Ok(donors
        .into_iter()
        .enumerate()
        .map(|(rank, text)| FillCandidate {
            fills: vec![text],
            score: -(rank as f64 + 1.0),
            backend: "donor".into(),
        })
        .collect())
}

pub struct DonorFiller {
    pool: DonorPool,
}

impl DonorFiller {
    pub fn new(unit: &ParsedUnit) -> Self {
        DonorFiller {
            pool: DonorPool::build(unit),
        }
    }

    pub fn pool(&self) -> &DonorPool {
        &self.pool
    }
}

impl MaskFiller for DonorFiller {
    fn name(&self) -> &str {
        "donor"
    }

    fn fill(&self, request: &FillRequest, candidate: &MaskedCandidate) -> Result<Vec<FillCandidate>, FillError> {
        donor_fill(request, &self.pool, candidate)
    }
}
