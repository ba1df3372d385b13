//! The shipped benchmark configurations. `configs/*.json` mirror these.

use crate::diagnostics::Checker;
use crate::optim::Variant;

use super::config::{ExperimentConfig, OptimizerConfig, ProblemConfig, SCHEMA_VERSION};

/// Scale under which the Rosenbrock rows below land on the reference endpoints.
pub const ROSENBROCK_SCALE: f64 = 0.1;
pub const ROSENBROCK_ITERATIONS: u64 = 15_000;

/// Learning rate used for the mini-batch stability comparison.
pub const STABILITY_ETA: f64 = 1.0;
pub const STABILITY_BATCH: usize = 128;
pub const STABILITY_ITERATIONS: u64 = 2000;

fn base(name: &str, problem: ProblemConfig, optimizer: OptimizerConfig, iterations: u64) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: Some(name.to_owned()),
        problem,
        optimizer,
        iterations,
        batch_size: None,
        seed: 0,
        record_every: 1,
        output_path: None,
        checkers: Vec::new(),
        converge_threshold: 1e-3,
    }
}

fn rosenbrock() -> ProblemConfig {
    ProblemConfig::Rosenbrock { a: 1.0, b: 100.0, scale: ROSENBROCK_SCALE, x0: vec![-2.0, -2.0] }
}

/// Rows: SGD 0.01, SGD 0.005, VAV 0.04, VAV 0.005.
pub fn rosenbrock_rows() -> Vec<ExperimentConfig> {
    let rows = [(Variant::Sgd, 0.01, "sgd_0.01"), (Variant::Sgd, 0.005, "sgd_0.005"), (Variant::Vav, 0.04, "vav_0.04"), (Variant::Vav, 0.005, "vav_0.005")];
    rows.iter()
        .map(|&(kind, eta, tag)| {
            let mut cfg = base(&format!("rosenbrock_{tag}"), rosenbrock(), OptimizerConfig::new(kind, eta), ROSENBROCK_ITERATIONS);
            if kind == Variant::Vav {
                cfg.checkers = Checker::ALL.to_vec();
            }
            cfg
        })
        .collect()
}

/// Deterministic convex benchmark.
pub fn quadratic_vav() -> ExperimentConfig {
    let problem = ProblemConfig::Quadratic {
        matrix: vec![vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 0.5], vec![0.0, 0.5, 2.0]],
        offset: 0.0,
        x0: vec![1.0, -2.0, 1.5],
    };
    let mut cfg = base("quadratic_vav", problem, OptimizerConfig::new(Variant::Vav, 0.1), 2000);
    cfg.checkers = Checker::ALL.to_vec();
    cfg
}

fn sine(name: &str, kind: Variant) -> ExperimentConfig {
    let problem = ProblemConfig::SineRegression {
        num_points: 512,
        noise_sd: 0.05,
        data_seed: None,
        hidden: vec![16, 16],
        data_csv: None,
    };
    let mut cfg = base(name, problem, OptimizerConfig::new(kind, STABILITY_ETA), STABILITY_ITERATIONS);
    cfg.batch_size = Some(STABILITY_BATCH);
    cfg.seed = 7;
    cfg.converge_threshold = 1e-2;
    cfg.checkers = vec![Checker::LowerBound];
    cfg
}

pub fn sine_sgd() -> ExperimentConfig {
    sine("sine_sgd", Variant::Sgd)
}

pub fn sine_vav() -> ExperimentConfig {
    let mut cfg = sine("sine_vav", Variant::Vav);
    cfg.checkers = Checker::ALL.to_vec();
    cfg
}

/// Every shipped config, keyed by file stem.
pub fn all() -> Vec<ExperimentConfig> {
    let mut out = rosenbrock_rows();
    out.push(quadratic_vav());
    out.push(sine_sgd());
    out.push(sine_vav());
    out
}
