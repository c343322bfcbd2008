#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};
use std::time::Duration;

use maskfix_core::ast::LiteralKind;
use maskfix_core::filler::{
    build_context, donor_fill, sequential_fill, DonorPool, FillCandidate, FillError, FillRequest, MaskFiller,
};
use maskfix_core::par::Execution;
use maskfix_core::templates::{mask_lines, MaskSlot};
use maskfix_core::{parse, Language, MaskedCandidate, ParsedUnit, TemplateOrder};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("repo root")
}

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture")
}

pub fn micro_manifest() -> PathBuf {
    repo_root().join("benchmarks/micro/manifest.json")
}

pub fn fixtures_manifest() -> PathBuf {
    repo_root().join("benchmarks/fixtures/manifest.json")
}

/// Whether the benchmark build/test shims can find a JVM.
pub fn java_available() -> bool {
    static AVAILABLE: OnceLock<bool> = OnceLock::new();
    *AVAILABLE.get_or_init(|| {
        let env = repo_root().join("benchmarks/tools/jenv");
        Command::new("sh")
            .arg("-c")
            .arg(format!(". '{}' && \"$JAVA\" -version", env.display()))
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .map(|s| s.success())
            .unwrap_or(false)
    })
}

/// Skips the calling test (with a note) when no JVM is around.
#[macro_export]
macro_rules! require_java {
    () => {
        if !common::java_available() {
            eprintln!("skipping: no Java toolchain for the benchmark shims");
            return;
        }
    };
}

// ---------------------------------------------------------------------------
// Donor oracle: a direct tree-sitter walk, independent of the arena.

/// Each list is sorted by the byte offset of the token itself.
struct Facts {
    /// (name, declared return type or None for a call site).
    methods: Vec<(String, Option<String>)>,
    /// (name, declared type).
    variables: Vec<(String, String)>,
    literals: Vec<(LiteralKind, String)>,
    operators: Vec<String>,
}

fn literal_kind(kind: &str) -> Option<LiteralKind> {
    Some(match kind {
        "decimal_integer_literal"
        | "hex_integer_literal"
        | "octal_integer_literal"
        | "binary_integer_literal"
        | "decimal_floating_point_literal"
        | "hex_floating_point_literal" => LiteralKind::Number,
        "string_literal" | "text_block" => LiteralKind::String,
        "character_literal" => LiteralKind::Char,
        "true" | "false" => LiteralKind::Boolean,
        "null_literal" => LiteralKind::Null,
        _ => return None,
    })
}

fn operator_family(op: &str) -> u8 {
    match op {
        "+" | "-" | "*" | "/" | "%" => 1,
        "==" | "!=" | "<" | ">" | "<=" | ">=" => 2,
        "&&" | "||" => 3,
        "&" | "|" | "^" | "<<" | ">>" | ">>>" => 4,
        _ if op.ends_with('=') => 5,
        _ => 0,
    }
}

fn collect(source: &str) -> Facts {
    let mut parser = tree_sitter::Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .expect("java grammar");
    let tree = parser.parse(source, None).expect("parse");
    let text = |n: tree_sitter::Node<'_>| source[n.byte_range()].to_string();
    let mut methods = Vec::new();
    let mut variables = Vec::new();
    let mut literals = Vec::new();
    let mut operators = Vec::new();
    let mut stack = vec![tree.root_node()];
    while let Some(node) = stack.pop() {
        let kind = node.kind();
        match kind {
            "method_declaration" => {
                if let (Some(name), Some(ty)) = (node.child_by_field_name("name"), node.child_by_field_name("type")) {
                    methods.push((name.start_byte(), (text(name), Some(text(ty)))));
                }
            }
            "method_invocation" => {
                if let Some(name) = node.child_by_field_name("name") {
                    methods.push((name.start_byte(), (text(name), None)));
                }
            }
            "local_variable_declaration" | "field_declaration" | "constant_declaration" => {
                let ty = node.child_by_field_name("type").map(text).unwrap_or_default();
                let mut cursor = node.walk();
                for d in node.children_by_field_name("declarator", &mut cursor) {
                    if let Some(name) = d.child_by_field_name("name") {
                        variables.push((name.start_byte(), (text(name), ty.clone())));
                    }
                }
            }
            "formal_parameter" | "enhanced_for_statement" | "resource" => {
                if let (Some(ty), Some(name)) = (node.child_by_field_name("type"), node.child_by_field_name("name")) {
                    variables.push((name.start_byte(), (text(name), text(ty))));
                }
            }
            "binary_expression" => {
                if let Some(op) = node.child_by_field_name("operator") {
                    operators.push((op.start_byte(), text(op)));
                }
            }
            "assignment_expression" => {
                if let Some(op) = node.child_by_field_name("operator") {
                    if text(op) != "=" {
                        operators.push((op.start_byte(), text(op)));
                    }
                }
            }
            _ => {}
        }
        if let Some(lk) = literal_kind(kind) {
            literals.push((node.start_byte(), (lk, text(node))));
        }
        let mut children: Vec<_> = (0..node.child_count()).filter_map(|i| node.child(i)).collect();
        children.reverse();
        stack.extend(children);
    }
    fn ordered<T>(mut v: Vec<(usize, T)>) -> Vec<T> {
        v.sort_by_key(|(at, _)| *at);
        v.into_iter().map(|(_, t)| t).collect()
    }
    Facts {
        methods: ordered(methods),
        variables: ordered(variables),
        literals: ordered(literals),
        operators: ordered(operators),
    }
}

fn push_new(out: &mut Vec<String>, s: &str, exclude: &str) {
    if s != exclude && !out.iter().any(|o| o == s) {
        out.push(s.to_string());
    }
}

/// Expected donor fills for a masked slot, best first.
pub fn donor_oracle(source: &str, slot: &MaskSlot, original: &str) -> Vec<String> {
    let facts = collect(source);
    let mut out = Vec::new();
    match slot {
        MaskSlot::MethodName { callee } => {
            let types_of = |name: &str| -> Vec<&String> {
                facts
                    .methods
                    .iter()
                    .filter(|(n, t)| n == name && t.is_some())
                    .map(|(_, t)| t.as_ref().unwrap())
                    .collect()
            };
            let wanted = types_of(callee);
            for (name, _) in &facts.methods {
                let theirs = types_of(name);
                let fits = wanted.is_empty() || theirs.is_empty() || theirs.iter().any(|t| wanted.contains(t));
                if fits && name != callee {
                    push_new(&mut out, name, original);
                }
            }
        }
        MaskSlot::Variable { name } => {
            let wanted: Vec<&String> = facts.variables.iter().filter(|(n, _)| n == name).map(|(_, t)| t).collect();
            for (n, t) in &facts.variables {
                if (wanted.is_empty() || wanted.contains(&t)) && n != name {
                    push_new(&mut out, n, original);
                }
            }
        }
        MaskSlot::Literal { kind } => {
            for (k, t) in &facts.literals {
                if k == kind {
                    push_new(&mut out, t, original);
                }
            }
        }
        MaskSlot::Operator { .. } => {
            let family = operator_family(original);
            for op in &facts.operators {
                if operator_family(op) == family {
                    push_new(&mut out, op, original);
                }
            }
        }
        _ => {}
    }
    out
}

pub fn slot_kind(slot: &MaskSlot) -> &'static str {
    match slot {
        MaskSlot::MethodName { .. } => "method",
        MaskSlot::Variable { .. } => "variable",
        MaskSlot::Literal { .. } => "literal",
        MaskSlot::Operator { .. } => "operator",
        _ => "other",
    }
}

// ---------------------------------------------------------------------------
// Random Java programs for property tests.

fn arb_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["a", "b", "c", "p", "count"]).prop_map(String::from),
        (0u32..300).prop_map(|n| n.to_string()),
        Just("\"s\"".to_string()),
        Just("'c'".to_string()),
        Just("null".to_string()),
        Just("true".to_string()),
        Just("data[a]".to_string()),
        Just("items.size()".to_string()),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*", "/", "<", ">=", "==", "!=", "&&", "||", "&"]),
                inner.clone()
            )
                .prop_map(|(l, op, r)| format!("{l} {op} {r}")),
            inner.clone().prop_map(|e| format!("({e})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("helper({x}, {y})")),
            inner.clone().prop_map(|e| format!("!{e}")),
            inner.clone().prop_map(|e| format!("(String) {e}")),
        ]
    })
}

fn arb_statement() -> impl Strategy<Value = Vec<String>> {
    let e = arb_expr;
    prop_oneof![
        e().prop_map(|x| vec![format!("a = {x};")]),
        e().prop_map(|x| vec![format!("int v = {x};")]),
        e().prop_map(|x| vec![format!("count += {x};")]),
        (e(), e()).prop_map(|(x, y)| vec![format!("helper({x}, {y});")]),
        (e(), e()).prop_map(|(x, y)| vec![format!("data[{x}] = {y};")]),
        (e(), e()).prop_map(|(c, x)| vec![format!("if ({c}) {{"), format!("    b = {x};"), "}".to_string()]),
        (e(), e()).prop_map(|(c, x)| vec![format!("while ({c}) {{"), format!("    c -= {x};"), "}".to_string()]),
        e().prop_map(|x| vec![format!("Object w = (Object) {x};")]),
        Just(vec!["a++;".to_string()]),
    ]
}

/// A compilable-looking class whose `run` body holds random statements.
pub fn arb_program() -> impl Strategy<Value = String> {
    (prop::collection::vec(arb_statement(), 1..7), e_final()).prop_map(|(stmts, ret)| {
        let mut out = String::from(
            "class Gen {\n    int[] data = new int[8];\n    java.util.List items;\n\n    int helper(int x, int y) {\n        return x;\n    }\n\n    int run(int a, int b, int c, int p) {\n        int count = 0;\n",
        );
        for stmt in stmts {
            for line in stmt {
                out.push_str("        ");
                out.push_str(&line);
                out.push('\n');
            }
        }
        out.push_str(&format!("        return {ret};\n    }}\n}}\n"));
        out
    })
}

fn e_final() -> impl Strategy<Value = String> {
    arb_expr()
}

// ---------------------------------------------------------------------------
// Mock fillers.

/// Sleeps on every call; models an endpoint that never answers in time.
pub struct StallFiller(pub Duration);

impl MaskFiller for StallFiller {
    fn name(&self) -> &str {
        "stall"
    }

    fn fill(&self, _: &FillRequest, _: &MaskedCandidate) -> Result<Vec<FillCandidate>, FillError> {
        std::thread::sleep(self.0);
        Err(FillError::Timeout)
    }
}

/// Returns the same ranked fills for every request.
pub struct FixedFiller(pub Vec<String>);

impl MaskFiller for FixedFiller {
    fn name(&self) -> &str {
        "fixed"
    }

    fn fill(&self, request: &FillRequest, _: &MaskedCandidate) -> Result<Vec<FillCandidate>, FillError> {
        Ok(self
            .0
            .iter()
            .take(request.beam_size)
            .enumerate()
            .map(|(i, f)| FillCandidate {
                fills: vec![f.clone()],
                score: -(i as f64 + 1.0),
                backend: "fixed".into(),
            })
            .collect())
    }
}

// ---------------------------------------------------------------------------
// Catalog invariants.

pub fn statement_lines(unit: &ParsedUnit) -> Vec<usize> {
    (1..=unit.line_count()).filter(|&l| unit.statement_at(l).is_ok()).collect()
}

pub fn candidates(unit: &ParsedUnit, lines: &[usize], exec: Execution) -> Vec<MaskedCandidate> {
    mask_lines(unit, lines, &TemplateOrder::default(), None, exec)
        .into_iter()
        .flat_map(|(_, r)| r.unwrap_or_default())
        .collect()
}

/// Every candidate, checked line by line and then over all lines at once
/// (the latter adds hunk-level sites).
pub fn all_candidates(unit: &ParsedUnit) -> Vec<MaskedCandidate> {
    let lines = statement_lines(unit);
    let mut out: Vec<MaskedCandidate> = lines.iter().flat_map(|&l| candidates(unit, &[l], Execution::Sequential)).collect();
    out.extend(candidates(unit, &lines, Execution::Sequential));
    out
}

pub fn lines_of(text: &str) -> Vec<&str> {
    text.split('\n').collect()
}

/// The edit touches only its declared regions: the byte splice reproduces
/// the patched text, and every line outside the regions is unchanged.
pub fn check_locality(source: &str, c: &MaskedCandidate) -> Result<(), String> {
    let (a, b) = c.original_bytes;
    let replacement = &c.patched_unit_text[a..a + c.replacement_len];
    let spliced = format!("{}{}{}", &source[..a], replacement, &source[b..]);
    if spliced != c.patched_unit_text {
        return Err("byte splice differs from patched text".into());
    }
    let old = lines_of(source);
    let new = lines_of(&c.patched_unit_text);
    let (o, p) = (c.original_region, c.patched_region);
    if o.first != p.first {
        return Err(format!("regions start apart: {o:?} vs {p:?}"));
    }
    if old[..o.first - 1] != new[..p.first - 1] {
        return Err("prefix lines changed".into());
    }
    if old[o.last.min(old.len())..] != new[p.last.min(new.len())..] {
        return Err("suffix lines changed".into());
    }
    let first_line = source[..a].matches('\n').count() + 1;
    let last_line = source[..b.max(a + 1) - 1].matches('\n').count() + 1;
    if o.last < o.first {
        // Pure insertion: an empty region placed before line `first`.
        if a != b || source[..a].matches('\n').count() + 1 != o.first {
            return Err(format!("insertion at byte {a} does not start line {}", o.first));
        }
    } else if !(o.contains(first_line) && o.contains(last_line.max(first_line))) {
        return Err(format!("byte edit on lines {first_line}..{last_line} outside {o:?}"));
    }
    Ok(())
}

pub fn check_masks(c: &MaskedCandidate) -> Result<(), String> {
    if c.mask_count != c.mask_offsets.len() {
        return Err("mask_count disagrees with offsets".into());
    }
    if c.patched_unit_text.matches(c.mask_token.as_str()).count() != c.mask_count {
        return Err("mask_count disagrees with text".into());
    }
    for &at in &c.mask_offsets {
        if !c.patched_unit_text[at..].starts_with(&c.mask_token) {
            return Err(format!("no mask at offset {at}"));
        }
        let line = c.patched_unit_text[..at].matches('\n').count() + 1;
        if !c.patched_region.contains(line) {
            return Err(format!("mask on line {line} outside {:?}", c.patched_region));
        }
    }
    if c.mask_count > 0 && !c.masked_line_text.contains(&c.mask_token) {
        return Err("masked line text lacks the mask".into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Donor oracle comparison over a fixture file.

pub const DONOR_FIXTURES: [&str; 5] = [
    "donor/Accounts.java",
    "donor/Matrix.java",
    "donor/Tokens.java",
    "donor/Shapes.java",
    "donor/Flags.java",
];

/// Compares donor fills with the tree-walk oracle on every donor-keyed mask
/// of every line; returns how many slots of each kind were checked.
pub fn donor_check_file(name: &str) -> BTreeMap<&'static str, usize> {
    let source = fixture(name);
    let unit = parse(&source, Language::Java).unwrap();
    let pool = DonorPool::build(&unit);
    let mut checked = BTreeMap::new();
    for line in 1..=unit.line_count() {
        if unit.statement_at(line).is_err() {
            continue;
        }
        for (_, result) in mask_lines(&unit, &[line], &TemplateOrder::default(), None, Execution::Sequential) {
            for candidate in result.unwrap_or_default() {
                let Some(slot) = candidate.slot.clone() else { continue };
                if candidate.mask_count != 1 || slot_kind(&slot) == "other" {
                    continue;
                }
                let context = build_context(&unit, &candidate).unwrap();
                let request = FillRequest::new(context, &candidate, 250);
                let got: Vec<String> = donor_fill(&request, &pool, &candidate)
                    .map(|fills| fills.into_iter().map(|f| f.fills[0].clone()).collect())
                    .unwrap_or_default();
                let want = donor_oracle(&source, &slot, &candidate.original_fragment);
                assert_eq!(
                    got, want,
                    "{name} line {line} {} {:?}: {}",
                    candidate.template, slot, candidate.masked_line_text
                );
                *checked.entry(slot_kind(&slot)).or_insert(0) += 1;
            }
        }
    }
    checked
}

// ---------------------------------------------------------------------------
// Scripted per-step scores for the sequential beam search.

const LINE_PREFIX: &str = "return ";

/// Per-step log-score of `token` after the tokens already placed. Tokens are
/// single characters, so the placed prefix decodes unambiguously.
#[derive(Clone)]
pub struct ScoreTable {
    pub vocab: Vec<String>,
    pub seed: u64,
}

impl ScoreTable {
    pub fn score(&self, prefix: &str, token: &str) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fxhash(prefix) ^ fxhash(token).rotate_left(17));
        -(rng.gen_range(1..1_000_000) as f64) / 100_000.0
    }

    /// Mock backend: reads the placed prefix out of the context and replies
    /// with every vocabulary token for the next mask, best first.
    pub fn transport(&self, calls: Arc<AtomicUsize>) -> impl Fn(&Value) -> Result<Value, maskfix_core::filler::FillError> + Send + Sync {
        let table = self.clone();
        move |body: &Value| {
            calls.fetch_add(1, Ordering::SeqCst);
            let context = body["context"].as_str().unwrap();
            let mask = body["mask_token"].as_str().unwrap();
            let line = context.lines().find(|l| l.starts_with(LINE_PREFIX) && l.contains(mask)).unwrap();
            let rest = &line[LINE_PREFIX.len()..];
            let prefix = &rest[..rest.find(mask).unwrap()];
            let remaining = rest.matches(mask).count();
            assert_eq!(body["mask_count"].as_u64().unwrap() as usize, remaining);
            let mut scored: Vec<(String, f64)> = table.vocab.iter().map(|t| (t.clone(), table.score(prefix, t))).collect();
            scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            let candidates: Vec<Value> = scored.iter().map(|(t, s)| json!({"fills": [t], "score": s})).collect();
            Ok(json!({ "candidates": candidates }))
        }
    }

    /// Every token string of length low..=high with its summed score.
    pub fn enumerate(&self, low: usize, high: usize) -> Vec<(String, f64)> {
        let mut all = Vec::new();
        let mut frontier = vec![(String::new(), 0.0)];
        for k in 1..=high {
            let mut next = Vec::new();
            for (prefix, score) in &frontier {
                for t in &self.vocab {
                    next.push((format!("{prefix}{t}"), score + self.score(prefix, t)));
                }
            }
            if k >= low {
                all.extend(next.iter().cloned());
            }
            frontier = next;
        }
        all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        all
    }
}

fn fxhash(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

pub fn beam_request(beam: usize) -> FillRequest {
    FillRequest {
        context_text: "// return allResultsMatch(n);\nboolean f(Node n) {\nreturn <mask>(n);\n}".into(),
        masked_line: "return <mask>(n);".into(),
        mask_count: 1,
        beam_size: beam,
        mask_token: "<mask>".into(),
    }
}

pub fn beam_run(table: &ScoreTable, beam: usize, range: (usize, usize)) -> (Vec<(String, f64)>, usize) {
    let calls = Arc::new(AtomicUsize::new(0));
    let transport = table.transport(Arc::clone(&calls));
    let out = sequential_fill(&beam_request(beam), &transport, range, "sequential").unwrap();
    let ranked = out.into_iter().map(|c| (c.fills[0].clone(), c.score)).collect();
    (ranked, calls.load(Ordering::SeqCst))
}

pub fn beam_vocab(n: usize) -> Vec<String> {
    ["a", "b", "c", "d", "e"][..n].iter().map(|s| s.to_string()).collect()
}

