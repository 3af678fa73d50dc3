//! Seeded reproduction runs over the builtin targets, with per-generation
//! metrics, expressive-range matrices and CSV export.

pub mod config;
pub mod error;
pub mod metrics;
pub mod report;
pub mod run;
pub mod targets;

pub use config::{DimsMode, ExperimentConfig, ExperimentTarget, CHECKPOINT_INTERVAL};
pub use error::ExperimentError;
pub use metrics::{mean_present, spearman, EraMatrix, MeanStd, RunMetrics, SeriesRow, Summary};
pub use report::export_report;
pub use run::{run_experiment, run_single, ExperimentReport, RunResult};
pub use targets::{builtin_target, BUILTIN_IDS, STEP_IDS};
