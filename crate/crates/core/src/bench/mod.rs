//! Benchmark manifests and batch runs.

mod manifest;
mod run;

pub use manifest::{load_manifest, BenchBug, BenchmarkManifest, ManifestError, MANIFEST_SCHEMA_VERSION};
pub use run::{
    bug_report_path, metrics_path, run_bench, Aggregate, BenchError, BenchHeader, BenchOptions, BugOutcome,
    BugSummary, MetricsReport, Precision, Timing, METRICS_SCHEMA_VERSION,
};
