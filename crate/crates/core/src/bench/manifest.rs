//! Benchmark manifests: a JSON list of bugs with shared defaults.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::ast::Language;
use crate::pipeline::BugInstance;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
    #[error("schema error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema error in {field}: {message}")]
    Schema { field: String, message: String },
    #[error("{field} refers to missing path {path}")]
    MissingPath { field: String, path: PathBuf },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDefaults {
    language: Option<Language>,
    project_root: Option<String>,
    build_command: Option<String>,
    test_command: Option<String>,
    #[serde(default)]
    vars: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBug {
    id: String,
    source_file: String,
    buggy_lines: Vec<usize>,
    project_root: Option<String>,
    build_command: Option<String>,
    test_command: Option<String>,
    reference_patch: Option<String>,
    language: Option<Language>,
    #[serde(default = "yes")]
    expressible: bool,
    #[serde(default)]
    vars: BTreeMap<String, String>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    schema_version: u32,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    defaults: RawDefaults,
    bugs: Vec<RawBug>,
}

/// A bug plus benchmark bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchBug {
    pub bug: BugInstance,
    /// Whether some catalog template can express the developer fix.
    pub expressible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkManifest {
    pub name: String,
    pub path: PathBuf,
    pub bugs: Vec<BenchBug>,
}

/// Replaces `{key}` placeholders.
fn substitute(template: &str, vars: &BTreeMap<String, String>) -> String {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

fn absolute(base: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    let joined = if path.is_absolute() { path.to_path_buf() } else { base.join(path) };
    normalize(&joined)
}

/// Lexical `.`/`..` removal; no symlink resolution.
fn normalize(path: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for part in path.components() {
        match part {
            std::path::Component::CurDir => {}
            std::path::Component::ParentDir => {
                out.pop();
            }
            other => out.push(other),
        }
    }
    out
}

fn require(field: String, path: &Path) -> Result<(), ManifestError> {
    if path.exists() {
        Ok(())
    } else {
        Err(ManifestError::MissingPath {
            field,
            path: path.to_path_buf(),
        })
    }
}

pub fn load_manifest(path: &Path) -> Result<BenchmarkManifest, ManifestError> {
    let text = fs::read_to_string(path).map_err(|e| ManifestError::Unreadable {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let raw: RawManifest = serde_json::from_str(&text).map_err(|e| ManifestError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.schema_version != MANIFEST_SCHEMA_VERSION {
        return Err(ManifestError::Schema {
            field: "schema_version".into(),
            message: format!("unsupported version {} (expected {MANIFEST_SCHEMA_VERSION})", raw.schema_version),
        });
    }
    let abs_path = normalize(&std::env::current_dir().unwrap_or_default().join(path));
    let base = abs_path.parent().map(Path::to_path_buf).unwrap_or_default();

    let mut ids = HashSet::new();
    let mut bugs = Vec::with_capacity(raw.bugs.len());
    for (i, rb) in raw.bugs.into_iter().enumerate() {
        let field = |name: &str| format!("bugs[{i}].{name}");
        if rb.id.trim().is_empty() {
            return Err(ManifestError::Schema {
                field: field("id"),
                message: "empty id".into(),
            });
        }
        if !ids.insert(rb.id.clone()) {
            return Err(ManifestError::Schema {
                field: field("id"),
                message: format!("duplicate id `{}`", rb.id),
            });
        }
        if rb.buggy_lines.is_empty() || rb.buggy_lines.contains(&0) {
            return Err(ManifestError::Schema {
                field: field("buggy_lines"),
                message: "must be a non-empty list of 1-based line numbers".into(),
            });
        }

        let mut vars = raw.defaults.vars.clone();
        vars.extend(rb.vars.clone());
        vars.insert("bench_dir".into(), base.display().to_string());
        vars.insert("bug_id".into(), rb.id.clone());

        let root_template = rb
            .project_root
            .clone()
            .or_else(|| raw.defaults.project_root.clone())
            .ok_or_else(|| ManifestError::Schema {
                field: field("project_root"),
                message: "no project_root and no default".into(),
            })?;
        let project_root = absolute(&base, &substitute(&root_template, &vars));
        require(field("project_root"), &project_root)?;
        vars.insert("project_root".into(), project_root.display().to_string());

        let source_file = absolute(&project_root, &substitute(&rb.source_file, &vars));
        require(field("source_file"), &source_file)?;
        let relative = source_file.strip_prefix(&project_root).map_err(|_| ManifestError::Schema {
            field: field("source_file"),
            message: "must lie inside project_root".into(),
        })?;
        vars.insert("source_file".into(), relative.display().to_string());

        let reference_patch = match &rb.reference_patch {
            Some(p) => {
                let p = absolute(&base, &substitute(p, &vars));
                require(field("reference_patch"), &p)?;
                Some(p)
            }
            None => None,
        };

        let command = |own: &Option<String>, default: &Option<String>, name: &str| {
            own.clone()
                .or_else(|| default.clone())
                .filter(|c| !c.trim().is_empty())
                .map(|c| substitute(&c, &vars))
                .ok_or_else(|| ManifestError::Schema {
                    field: field(name),
                    message: "no command and no default".into(),
                })
        };
        let build_command = command(&rb.build_command, &raw.defaults.build_command, "build_command")?;
        let test_command = command(&rb.test_command, &raw.defaults.test_command, "test_command")?;

        bugs.push(BenchBug {
            bug: BugInstance {
                id: rb.id,
                project_root,
                source_file,
                buggy_lines: rb.buggy_lines,
                build_command,
                test_command,
                reference_patch,
                language: rb.language.or(raw.defaults.language).unwrap_or_default(),
            },
            expressible: rb.expressible,
        });
    }
    Ok(BenchmarkManifest {
        name: raw.name.unwrap_or_else(|| {
            abs_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        }),
        path: abs_path,
        bugs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, rel: &str, text: &str) {
        let p = dir.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, text).unwrap();
    }

    fn fixture(bugs: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a/project/A.java", "class A {}\n");
        write(dir.path(), "a/fixed/A.java", "class A {}\n");
        let manifest = format!(
            r#"{{"schema_version": 1, "defaults": {{"project_root": "{{bug_id}}/project", "build_command": "make -C {{project_root}}", "test_command": "run {{source_file}}"}}, "bugs": {bugs}}}"#
        );
        let path = dir.path().join("m.json");
        fs::write(&path, manifest).unwrap();
        (dir, path)
    }

    #[test]
    fn resolves_paths_and_commands() {
        let (dir, path) = fixture(r#"[{"id": "a", "source_file": "A.java", "buggy_lines": [1], "reference_patch": "a/fixed/A.java"}]"#);
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.bugs.len(), 1);
        let bug = &m.bugs[0].bug;
        let root = dir.path().join("a/project");
        assert_eq!(bug.project_root, root);
        assert_eq!(bug.source_file, root.join("A.java"));
        assert_eq!(bug.build_command, format!("make -C {}", root.display()));
        assert_eq!(bug.test_command, "run A.java");
        assert!(m.bugs[0].expressible);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let (_d, path) = fixture(
            r#"[{"id": "a", "source_file": "A.java", "buggy_lines": [1]}, {"id": "a", "source_file": "A.java", "buggy_lines": [1]}]"#,
        );
        assert!(matches!(load_manifest(&path), Err(ManifestError::Schema { field, .. }) if field == "bugs[1].id"));
    }

    #[test]
    fn missing_file_named() {
        let (_d, path) = fixture(r#"[{"id": "a", "source_file": "Nope.java", "buggy_lines": [1]}]"#);
        match load_manifest(&path) {
            Err(ManifestError::MissingPath { path, .. }) => assert!(path.ends_with("Nope.java")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        fs::write(&path, "{\n  \"schema_version\": 1,\n  \"bugs\": [oops]\n}").unwrap();
        assert!(matches!(load_manifest(&path), Err(ManifestError::Syntax { line: 3, .. })));
    }

    #[test]
    fn empty_manifest() {
        let (_d, path) = fixture("[]");
        assert!(load_manifest(&path).unwrap().bugs.is_empty());
    }
}
