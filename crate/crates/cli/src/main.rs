use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use maskfix_core::bench::{load_manifest, run_bench, BenchOptions};
use maskfix_core::filler::{Backend, FillerConfig};
use maskfix_core::par::Execution;
use maskfix_core::pipeline::{repair, BugInstance, RepairOptions, RepairReport, RunBudget};
use maskfix_core::templates::{mask_lines, TemplateFilter, TemplateId, TemplateOrder};
use maskfix_core::{parse, Language};
use serde::Deserialize;

#[derive(Parser)]
#[command(
    name = "maskfix",
    version,
    about = "Template-based program repair with masked infilling",
    after_help = "Remote fillers send the credential in MASKFIX_API_KEY as a bearer token."
)]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repair one bug.
    Repair(RepairArgs),
    /// Repair every bug of a manifest and write aggregate metrics.
    Bench(BenchArgs),
    /// Print the masked candidates for some lines without filling or validating.
    Mask(MaskArgs),
    /// Inspect the template catalog.
    Templates {
        #[command(subcommand)]
        action: TemplatesAction,
    },
}

#[derive(Subcommand)]
enum TemplatesAction {
    /// One line per template.
    List,
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML file with [filler] and [budget] tables; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Filler backend: donor, span, sequential, prompt or oracle.
    #[arg(long)]
    filler: Option<Backend>,
    /// Fill endpoint for the span, sequential and prompt backends.
    #[arg(long, env = "MASKFIX_ENDPOINT")]
    endpoint: Option<String>,
    /// Seconds before a fill request is abandoned.
    #[arg(long)]
    filler_timeout: Option<f64>,
    /// Fills requested per masked candidate.
    #[arg(long)]
    beam: Option<usize>,
    /// Wall-clock budget per bug, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Limit on each build or test command, in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Keep validating after the first plausible patch.
    #[arg(long)]
    exhaustive: bool,
    /// Stop after this many validated candidates.
    #[arg(long)]
    max_candidates: Option<usize>,
    /// Concurrent validations (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Restrict to one template family (T5) or sub-template (T5.name).
    #[arg(long)]
    template: Option<TemplateFilter>,
    /// Template family order, e.g. 5,2,12,4,7,9,3,6,1,8,10,13,11.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<u8>>,
}

#[derive(Args)]
struct RepairArgs {
    /// Manifest to take the bug from (with --bug).
    #[arg(long, requires = "bug")]
    manifest: Option<PathBuf>,
    /// Bug id within --manifest.
    #[arg(long, requires = "manifest")]
    bug: Option<String>,
    /// Buggy source file (ad-hoc bug).
    #[arg(long, conflicts_with = "manifest", requires_all = ["line", "build", "test"])]
    file: Option<PathBuf>,
    /// 1-based buggy line; repeat or comma-separate for several.
    #[arg(long, value_delimiter = ',')]
    line: Vec<usize>,
    /// Build command, run in a copy of the project root.
    #[arg(long)]
    build: Option<String>,
    /// Test command, run after a successful build.
    #[arg(long)]
    test: Option<String>,
    /// Project directory copied for each validation (default: the file's directory).
    #[arg(long)]
    project_root: Option<PathBuf>,
    /// Fixed version of the file, for reference-equivalence checks.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Directory for report.json and transcripts; the report goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Repeat bugs that already have a report in the output directory.
    #[arg(long)]
    rerun: bool,
    #[arg(long, default_value = "maskfix-out")]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct MaskArgs {
    #[arg(long)]
    file: PathBuf,
    /// 1-based line; repeat or comma-separate for several.
    #[arg(long, required = true, value_delimiter = ',')]
    line: Vec<usize>,
    #[arg(long)]
    template: Option<TemplateFilter>,
    /// Accepted for symmetry with `repair`; `mask` never fills or validates.
    #[arg(long)]
    dry_run: bool,
    /// Emit candidates as JSON lines.
    #[arg(long)]
    json: bool,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    filler: Option<FillerConfig>,
    budget: Option<RunBudget>,
    order: Option<Vec<u8>>,
    template: Option<String>,
}

struct Settings {
    budget: RunBudget,
    filler: FillerConfig,
    order: TemplateOrder,
    filter: Option<TemplateFilter>,
}

fn settings(args: &RunArgs) -> Result<Settings, String> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            toml::from_str::<ConfigFile>(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ConfigFile::default(),
    };
    let mut filler = file.filler.unwrap_or_default();
    let mut budget = file.budget.unwrap_or_default();
    if let Some(b) = args.filler {
        filler.backend = b;
    }
    if let Some(e) = &args.endpoint {
        filler.endpoint = Some(e.clone());
    }
    if let Some(t) = args.filler_timeout {
        filler.timeout_secs = t;
    }
    filler.validate().map_err(|e| e.to_string())?;
    if filler.backend.is_remote() && filler.endpoint.is_none() {
        return Err(format!("the {} filler needs --endpoint", filler.backend));
    }
    if let Some(n) = args.beam {
        budget.beam_size = n;
    }
    if let Some(s) = args.time_limit {
        budget.wall_clock_limit_secs = s;
    }
    if let Some(s) = args.timeout {
        budget.command_timeout_secs = s;
    }
    if args.exhaustive {
        budget.stop_on_first_plausible = false;
    }
    if args.max_candidates.is_some() {
        budget.max_candidates = args.max_candidates;
    }
    if let Some(w) = args.workers {
        budget.validation_workers = w;
    }
    let order = match args.order.as_ref().or(file.order.as_ref()) {
        Some(majors) => TemplateOrder::from_majors(majors).map_err(|e| e.to_string())?,
        None => TemplateOrder::default(),
    };
    let filter = match (args.template, &file.template) {
        (Some(f), _) => Some(f),
        (None, Some(s)) => Some(s.parse().map_err(|e| format!("{e}"))?),
        (None, None) => None,
    };
    Ok(Settings {
        budget,
        filler,
        order,
        filter,
    })
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

fn resolve_bug(args: &RepairArgs) -> Result<BugInstance, String> {
    if let (Some(manifest), Some(id)) = (&args.manifest, &args.bug) {
        let manifest = load_manifest(manifest).map_err(|e| e.to_string())?;
        return manifest
            .bugs
            .into_iter()
            .find(|b| &b.bug.id == id)
            .map(|b| b.bug)
            .ok_or_else(|| format!("no bug `{id}` in manifest"));
    }
    let file = args.file.as_ref().ok_or("give --manifest with --bug, or --file with --line, --build and --test")?;
    let source_file = absolute(file);
    if !source_file.is_file() {
        return Err(format!("{} does not exist", source_file.display()));
    }
    let project_root = match &args.project_root {
        Some(p) => absolute(p),
        None => source_file.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    Ok(BugInstance {
        id: source_file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "bug".into()),
        project_root,
        source_file,
        buggy_lines: args.line.clone(),
        build_command: args.build.clone().unwrap_or_default(),
        test_command: args.test.clone().unwrap_or_default(),
        reference_patch: args.reference.as_deref().map(absolute),
        language: Language::Java,
    })
}

fn summarize(report: &RepairReport) -> String {
    if let Some(e) = &report.setup_error {
        return format!("{}: setup error: {e}", report.bug_id);
    }
    let c = &report.counts;
    let found = match report.first_plausible() {
        Some(p) => format!(
            "first plausible patch at rank {} ({}, line {})",
            p.global_rank, p.origin.template, p.origin.anchor_line
        ),
        None => "no plausible patch".into(),
    };
    format!(
        "{}: {found}; validated {}, compiled {}, plausible {}, reference-equivalent {}; halted by {:?} after {:.1}s",
        report.bug_id, c.validated, c.compiled, c.plausible, c.reference_equivalent, report.halted_by, report.elapsed_secs
    )
}

fn cmd_repair(args: RepairArgs) -> Result<ExitCode, String> {
    let s = settings(&args.run)?;
    let bug = resolve_bug(&args)?;
    let options = RepairOptions {
        filler: s.filler,
        order: s.order,
        filter: s.filter,
        transcript_dir: args.out.as_ref().map(|o| o.join("transcripts")),
    };
    let report = repair(&bug, &s.budget, &options);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &args.out {
        Some(out) => {
            let path = out.join("report.json");
            fs::write(&path, json + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
            eprintln!("report written to {}", path.display());
        }
        None => println!("{json}"),
    }
    eprintln!("{}", summarize(&report));
    if let Some(p) = report.first_plausible() {
        eprintln!("{}", p.diff);
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, String> {
    let s = settings(&args.run)?;
    let manifest = load_manifest(&args.manifest).map_err(|e| e.to_string())?;
    let options = BenchOptions {
        filler: s.filler,
        order: s.order,
        filter: s.filter,
        rerun: args.rerun,
    };
    let report = run_bench(&manifest, &s.budget, &options, &args.out).map_err(|e| e.to_string())?;
    for bug in &report.bugs {
        println!(
            "{:<28} {:<22} validated {:>4}",
            bug.id,
            serde_json::to_value(bug.outcome).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
            bug.candidates_validated
        );
    }
    let a = &report.aggregate;
    println!(
        "attempted {}, plausible {}, reference-equivalent {}, precision {}, mean validated {:.1}, {:.1}s",
        a.attempted, a.plausible, a.reference_equivalent, a.precision, a.mean_candidates_validated, report.timing.total_wall_secs
    );
    eprintln!("metrics written to {}", args.out.join("metrics.json").display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_mask(args: MaskArgs) -> Result<ExitCode, String> {
    let text = fs::read_to_string(&args.file).map_err(|e| format!("{}: {e}", args.file.display()))?;
    let unit = parse(&text, Language::Java).map_err(|e| e.to_string())?;
    if let Some(&bad) = args.line.iter().find(|&&l| l == 0 || l > unit.line_count()) {
        return Err(format!("line {bad} is outside the file ({} lines)", unit.line_count()));
    }
    let mut total = 0;
    for (site, result) in mask_lines(&unit, &args.line, &TemplateOrder::default(), args.template, Execution::default()) {
        match result {
            Ok(candidates) => {
                for c in candidates {
                    total += 1;
                    if args.json {
                        println!("{}", serde_json::to_string(&c).expect("candidate serializes"));
                    } else {
                        println!("{:<18} line {:<5} {}", c.template.to_string(), c.anchor_line, c.masked_line_text.trim());
                    }
                }
            }
            Err(e) => tracing::debug!(template = %site.template, error = %e, "no candidate"),
        }
    }
    eprintln!("{total} masked candidates");
    Ok(ExitCode::SUCCESS)
}

fn cmd_templates() -> ExitCode {
    for id in TemplateId::ALL {
        println!("{:<18} {}", id.to_string(), id.description());
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(level)),
        )
        .with_writer(std::io::stderr)
        .init();

    let result = match cli.command {
        Command::Repair(a) => cmd_repair(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Mask(a) => cmd_mask(a),
        Command::Templates { action: TemplatesAction::List } => Ok(cmd_templates()),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
