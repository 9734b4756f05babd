//! Experiment orchestration: replicated solver runs, baseline comparisons,
//! gap metrics and report emission.

mod metrics;
mod report;
mod runner;

pub use metrics::{compute_metrics, MetricsError, MetricsRow};
pub use report::{emit_report, parse_report, ReportError, ReportFormat};
pub use runner::{
    run_manifest, run_replicated, ExperimentError, InstanceSource, Manifest, NetworkSource,
};
