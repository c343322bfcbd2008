//! Compile-and-test validation in a throwaway copy of the project.

use std::fs::{self, File};
use std::io::{self, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::OnceLock;
use std::time::Duration;

use regex::Regex;
use thiserror::Error;
use wait_timeout::ChildExt;

use super::{BugInstance, PatchCandidate, ValidationOutcome};
use crate::lex::token_equivalent;

const LOG_EXCERPT_BYTES: u64 = 2000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidateError {
    #[error("cannot prepare workdir: {0}")]
    WorkdirSetupFailed(String),
    #[error("cannot read reference patch {path}: {reason}")]
    ReferenceUnreadable { path: PathBuf, reason: String },
}

fn setup_err(e: impl std::fmt::Display) -> ValidateError {
    ValidateError::WorkdirSetupFailed(e.to_string())
}

fn copy_tree(from: &Path, to: &Path) -> io::Result<()> {
    fs::create_dir_all(to)?;
    for entry in fs::read_dir(from)? {
        let entry = entry?;
        let target = to.join(entry.file_name());
        let ty = entry.file_type()?;
        if ty.is_dir() {
            copy_tree(&entry.path(), &target)?;
        } else if ty.is_symlink() {
            let link = fs::read_link(entry.path())?;
            #[cfg(unix)]
            std::os::unix::fs::symlink(link, &target)?;
            #[cfg(not(unix))]
            fs::copy(entry.path().parent().unwrap_or(from).join(link), &target)?;
        } else {
            fs::copy(entry.path(), &target)?;
        }
    }
    Ok(())
}

fn tail(path: &Path) -> String {
    let Ok(mut file) = File::open(path) else {
        return String::new();
    };
    let len = file.metadata().map(|m| m.len()).unwrap_or(0);
    let _ = file.seek(SeekFrom::Start(len.saturating_sub(LOG_EXCERPT_BYTES)));
    let mut buf = Vec::new();
    let _ = file.read_to_end(&mut buf);
    String::from_utf8_lossy(&buf).into_owned()
}

enum Exit {
    Success,
    Failure,
    TimedOut,
}

fn kill_group(child: &mut std::process::Child) {
    #[cfg(unix)]
    {
        let _ = Command::new("kill")
            .args(["-KILL", "--", &format!("-{}", child.id())])
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status();
    }
    let _ = child.kill();
    let _ = child.wait();
}

fn run(command: &str, cwd: &Path, source: &Path, timeout: Duration, log: &Path) -> io::Result<Exit> {
    let out = File::create(log)?;
    let err = out.try_clone()?;
    let mut cmd = Command::new("sh");
    cmd.arg("-c")
        .arg(command)
        .current_dir(cwd)
        .env("MASKFIX_WORKDIR", cwd)
        .env("MASKFIX_SOURCE_FILE", source)
        .stdin(Stdio::null())
        .stdout(out)
        .stderr(err);
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }
    let mut child = cmd.spawn()?;
    match child.wait_timeout(timeout)? {
        Some(status) if status.success() => Ok(Exit::Success),
        Some(_) => Ok(Exit::Failure),
        None => {
            kill_group(&mut child);
            Ok(Exit::TimedOut)
        }
    }
}

/// Failing test names reported by JUnit-style runners or `FAIL name` lines.
pub fn parse_failing_tests(log: &str) -> Vec<String> {
    static PATTERNS: OnceLock<[Regex; 2]> = OnceLock::new();
    let [junit, generic] = PATTERNS.get_or_init(|| {
        [
            Regex::new(r"(?m)^\d+\) ([\w$]+)\(([\w.$]+)\)").unwrap(),
            Regex::new(r"(?m)^\s*(?:FAIL|FAILED|FAILURE)[:\s]+([\w.$#\[\]-]+)").unwrap(),
        ]
    });
    let mut names: Vec<String> = Vec::new();
    let found = junit
        .captures_iter(log)
        .map(|c| format!("{}.{}", &c[2], &c[1]))
        .chain(generic.captures_iter(log).map(|c| c[1].to_string()));
    for name in found {
        if !names.contains(&name) {
            names.push(name);
        }
    }
    names
}

/// Validates candidates of one bug. Each call works in a fresh copy of the
/// project, so calls may run concurrently.
#[derive(Debug, Clone)]
pub struct Validator {
    project_root: PathBuf,
    relative_source: PathBuf,
    build_command: String,
    test_command: String,
    reference: Option<String>,
    timeout: Duration,
    log_dir: Option<PathBuf>,
}

impl Validator {
    pub fn new(bug: &BugInstance, timeout: Duration, log_dir: Option<PathBuf>) -> Result<Self, ValidateError> {
        let relative_source = bug.relative_source().map_err(setup_err)?.to_path_buf();
        let reference = match &bug.reference_patch {
            Some(path) => Some(fs::read_to_string(path).map_err(|e| ValidateError::ReferenceUnreadable {
                path: path.clone(),
                reason: e.to_string(),
            })?),
            None => None,
        };
        if let Some(dir) = &log_dir {
            fs::create_dir_all(dir).map_err(setup_err)?;
        }
        Ok(Validator {
            project_root: bug.project_root.clone(),
            relative_source,
            build_command: bug.build_command.clone(),
            test_command: bug.test_command.clone(),
            reference,
            timeout,
            log_dir,
        })
    }

    pub fn reference(&self) -> Option<&str> {
        self.reference.as_deref()
    }

    pub fn validate(&self, candidate: &PatchCandidate) -> Result<ValidationOutcome, ValidateError> {
        let scratch = tempfile::Builder::new().prefix("maskfix-").tempdir().map_err(setup_err)?;
        let workdir = scratch.path().join("project");
        copy_tree(&self.project_root, &workdir).map_err(setup_err)?;
        fs::write(workdir.join(&self.relative_source), &candidate.patched_source).map_err(setup_err)?;

        let logs = scratch.path();
        let build_log = logs.join("build.log");
        let test_log = logs.join("test.log");
        let keep = |log: &Path, phase: &str| {
            if let Some(dir) = &self.log_dir {
                let _ = fs::copy(log, dir.join(format!("{:05}-{phase}.log", candidate.global_rank)));
            }
        };

        let build = run(&self.build_command, &workdir, &self.relative_source, self.timeout, &build_log).map_err(setup_err)?;
        keep(&build_log, "build");
        match build {
            Exit::Success => {}
            Exit::Failure => return Ok(ValidationOutcome::CompileError { log: tail(&build_log) }),
            Exit::TimedOut => {
                return Ok(ValidationOutcome::CompileError {
                    log: format!("build timed out after {:?}", self.timeout),
                })
            }
        }

        let test = run(&self.test_command, &workdir, &self.relative_source, self.timeout, &test_log).map_err(setup_err)?;
        keep(&test_log, "test");
        let outcome = match test {
            Exit::Success => match &self.reference {
                Some(reference) if token_equivalent(&candidate.patched_source, reference) => {
                    ValidationOutcome::ReferenceEquivalent
                }
                _ => ValidationOutcome::Plausible,
            },
            Exit::Failure => ValidationOutcome::TestsFailed {
                failing_tests: parse_failing_tests(&fs::read_to_string(&test_log).unwrap_or_default()),
                timed_out: false,
            },
            Exit::TimedOut => ValidationOutcome::TestsFailed {
                failing_tests: Vec::new(),
                timed_out: true,
            },
        };
        Ok(outcome)
    }
}

/// One-shot validation of `candidate` for `bug`.
pub fn validate(candidate: &PatchCandidate, bug: &BugInstance, timeout: Duration) -> Result<ValidationOutcome, ValidateError> {
    Validator::new(bug, timeout, None)?.validate(candidate)
}
