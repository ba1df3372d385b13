//! The full invariant suite behind `vav selftest`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{audit_omega, OmegaSolve, IDENTITY_TOL, INEQUALITY_TOL};
use crate::error::Result;
use crate::gradcheck::check_gradient;
use crate::objective::Objective;
use crate::optim::{solve_omega, vav_position_update, vav_tilde_r, OmegaInputs, Variant};
use crate::params::ParamVector;
use crate::problems::{make_sine_regression, Rosenbrock};
use crate::rng::{sample_batch, RngStream};

use super::config::ExperimentConfig;
use super::presets;
use super::runner::{run_experiment, RunStatus, RunSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestCheck {
    pub name: String,
    pub passed: bool,
    /// Soft checks are reported but never fail the suite.
    pub soft: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub checks: Vec<SelftestCheck>,
}

impl SelftestReport {
    fn push(&mut self, name: &str, passed: bool, soft: bool, detail: String) {
        self.checks.push(SelftestCheck { name: name.to_owned(), passed, soft, detail });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.soft)
    }

    pub fn to_text(&self) -> String {
        self.checks
            .iter()
            .map(|c| {
                let tag = match (c.passed, c.soft) {
                    (true, _) => "PASS",
                    (false, true) => "WARN",
                    (false, false) => "FAIL",
                };
                format!("{tag} {}: {}\n", c.name, c.detail)
            })
            .collect()
    }
}

const RANDOM_CASES: usize = 10_000;
const GRADIENT_POINTS: usize = 100;

/// Central-difference check at random points; returns (failures, worst relative error).
fn gradient_sweep(obj: &dyn Objective, points: usize, rng: &mut RngStream, mut draw: impl FnMut(&mut RngStream) -> Vec<f64>) -> Result<(usize, f64)> {
    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x = draw(rng);
        let batch = if obj.dataset_size() > 32 { Some(sample_batch(rng, obj.dataset_size(), 32)?) } else { None };
        let check = check_gradient(obj, &x, batch.as_ref(), 1e-6, 1e-4, 1e-8)?;
        worst = worst.max(check.max_rel_error);
        failures += usize::from(!check.passed);
    }
    Ok((failures, worst))
}

fn gradient_checks(report: &mut SelftestReport) -> Result<()> {
    let mut rng = RngStream::with_stream(11, 0);
    let square = |rng: &mut RngStream| vec![rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)];
    let quad_cfg = presets::quadratic_vav();
    let (quad, _) = quad_cfg.build()?;
    let sine = make_sine_regression(512, 0.05, 7)?;
    let cases: Vec<(&str, Box<dyn Objective>)> = vec![
        ("rosenbrock", Box::new(Rosenbrock::default())),
        ("rosenbrock_scaled", Box::new(Rosenbrock::scaled(presets::ROSENBROCK_SCALE))),
        ("quadratic", Box::new(quad)),
        ("sine_regression", Box::new(sine.clone())),
    ];
    for (name, obj) in &cases {
        let dim = obj.dim();
        let (failures, worst) = if *name == "sine_regression" {
            let mut seed = 0;
            gradient_sweep(obj.as_ref(), GRADIENT_POINTS, &mut rng, |_| {
                seed += 1;
                sine.init_params(seed)
            })?
        } else if dim == 2 {
            gradient_sweep(obj.as_ref(), GRADIENT_POINTS, &mut rng, square)?
        } else {
            gradient_sweep(obj.as_ref(), GRADIENT_POINTS, &mut rng, |r| (0..dim).map(|_| r.uniform(-3.0, 3.0)).collect())?
        };
        report.push(
            &format!("gradient_oracle/{name}"),
            failures == 0,
            false,
            format!("{failures}/{GRADIENT_POINTS} points failed, worst relative error {worst:.2e}"),
        );
    }
    Ok(())
}

/// Random relaxation inputs covering both `r_tilde` below and above `sqrt(F)`.
pub fn random_omega_inputs(rng: &mut RngStream) -> OmegaInputs {
    let f_next = 10f64.powf(rng.uniform(-4.0, 2.0));
    OmegaInputs {
        f_next,
        r_tilde: f_next.sqrt() * rng.uniform(0.0, 2.0),
        dx: rng.uniform(-1.0, 1.0),
        psi: rng.uniform(0.01, 0.99),
        eta: 10f64.powf(rng.uniform(-3.0, 0.0)),
    }
}

fn omega_audit(report: &mut SelftestReport) -> Result<()> {
    let mut rng = RngStream::with_stream(12, 0);
    let mut solves = Vec::with_capacity(RANDOM_CASES);
    for i in 0..RANDOM_CASES {
        let inputs = random_omega_inputs(&mut rng);
        let omega = solve_omega(&inputs)?;
        solves.push(OmegaSolve { step: i as u64, coordinate: 0, inputs, omega });
    }
    let reports = audit_omega(solves, INEQUALITY_TOL);
    let failed = reports.iter().filter(|r| !r.passed).count();
    report.push("omega_audit", failed == 0, false, format!("{failed}/{} reports failed over {RANDOM_CASES} solves", reports.len()));
    Ok(())
}

fn dissipation_random(report: &mut SelftestReport) -> Result<()> {
    let mut rng = RngStream::with_stream(13, 0);
    let mut worst = 0.0f64;
    let mut failed = 0;
    for _ in 0..RANDOM_CASES {
        let r = rng.uniform(1e-3, 5.0);
        let g = rng.uniform(-10.0, 10.0);
        let f = rng.uniform(0.0, 10.0);
        let c = rng.uniform(0.0, 1.0) + if f == 0.0 { 1e-3 } else { 0.0 };
        let eta = 10f64.powf(rng.uniform(-3.0, 0.0));
        let rt = vav_tilde_r(&[r], &[g], f, c, eta)?[0];
        let x = ParamVector::new(vec![0.0])?;
        let dx = vav_position_update(&x, &[g], &[rt], f, c, &[eta])?[0];
        let residual = (rt * rt - r * r + (rt - r) * (rt - r) + dx * dx / eta).abs() / (r * r).max(1.0);
        worst = worst.max(residual);
        failed += usize::from(residual > IDENTITY_TOL);
    }
    report.push("dissipation_random", failed == 0, false, format!("{failed}/{RANDOM_CASES} cases failed, worst relative residual {worst:.2e}"));
    Ok(())
}

fn near(x: &[f64], target: [f64; 2], tol: f64) -> bool {
    x.len() == 2 && (x[0] - target[0]).abs() <= tol && (x[1] - target[1]).abs() <= tol
}

fn audit_line(s: &RunSummary) -> String {
    let checked: u64 = s.audit.tallies.values().map(|t| t.checked).sum();
    format!("{} hard failures over {checked} checks", s.audit.hard_failures())
}

fn run_checks(report: &mut SelftestReport, out_dir: &Path) -> Result<()> {
    let cfgs: Vec<ExperimentConfig> = presets::all();
    let results: Vec<Result<RunSummary>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfgs
            .iter()
            .map(|cfg| {
                let dir: PathBuf = out_dir.join(cfg.display_name());
                scope.spawn(move || run_experiment(cfg, &dir))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("selftest run panicked")).collect()
    });
    let summaries = results.into_iter().collect::<Result<Vec<_>>>()?;
    let by_name = |n: &str| summaries.iter().find(|s| s.name == n).expect("preset present");

    let endpoints = [
        ("rosenbrock_sgd_0.005", [0.9846, 0.9693]),
        ("rosenbrock_vav_0.04", [0.9964, 0.9931]),
        ("rosenbrock_vav_0.005", [0.9843, 0.9688]),
    ];
    let sgd_hot = by_name("rosenbrock_sgd_0.01");
    report.push(
        "rosenbrock/rosenbrock_sgd_0.01",
        sgd_hot.status == RunStatus::Diverged,
        false,
        format!("status {:?}, {}", sgd_hot.status, sgd_hot.divergence.as_deref().unwrap_or("no divergence")),
    );
    for (name, target) in endpoints {
        let s = by_name(name);
        let x = s.final_x.clone().unwrap_or_default();
        report.push(&format!("rosenbrock/{name}"), near(&x, target, 0.05), false, format!("endpoint {x:?}, expected {target:?} within 0.05"));
    }

    for s in summaries.iter().filter(|s| s.optimizer == Variant::Vav) {
        report.push(&format!("audit/{}", s.name), s.audit.hard_failures() == 0, false, audit_line(s));
    }

    let quad = by_name("quadratic_vav");
    let quad_frac = quad.violation_fraction.unwrap_or(1.0);
    report.push("lower_bound/quadratic_vav", quad_frac == 0.0, false, format!("violation fraction {quad_frac}"));

    let (sgd, vav) = (by_name("sine_sgd"), by_name("sine_vav"));
    report.push(
        "stability/sine",
        sgd.status == RunStatus::Diverged && vav.status != RunStatus::Diverged && vav.steps_executed == presets::STABILITY_ITERATIONS,
        false,
        format!(
            "eta {}: sgd {:?} ({}), vav {:?} after {} steps, final loss {:?}",
            presets::STABILITY_ETA,
            sgd.status,
            sgd.divergence.as_deref().unwrap_or("finite"),
            vav.status,
            vav.steps_executed,
            vav.final_loss
        ),
    );
    let vav_frac = vav.violation_fraction.unwrap_or(1.0);
    report.push("lower_bound/sine_vav", vav_frac <= 0.01, true, format!("violation fraction {vav_frac}"));
    Ok(())
}

/// Runs every check, writing the benchmark runs under `out_dir`.
pub fn selftest(out_dir: &Path) -> Result<SelftestReport> {
    let mut report = SelftestReport::default();
    gradient_checks(&mut report)?;
    omega_audit(&mut report)?;
    dissipation_random(&mut report)?;
    run_checks(&mut report, out_dir)?;
    Ok(report)
}

