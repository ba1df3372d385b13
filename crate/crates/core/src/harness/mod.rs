//! Experiment harness: configs, runs, metrics files, sweeps and comparisons.

pub mod compare;
pub mod config;
pub mod metrics;
pub mod presets;
pub mod runner;
pub mod selftest;
pub mod sweep;

pub use compare::{compare_runs, CompareRow, Comparison};
pub use config::{ExperimentConfig, OptimizerConfig, Problem, ProblemConfig, SCHEMA_VERSION};
pub use metrics::{read_metrics, read_summary, MetricsWriter, METRICS_FILE, SUMMARY_FILE};
pub use runner::{run_experiment, run_in_memory, run_with_sink, RunStatus, RunSummary};
pub use selftest::{selftest, SelftestCheck, SelftestReport};
pub use sweep::{apply_param, parse_values, sweep, sweep_in_memory, SweepParam};
