//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any hard criterion fails.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use vav_core::harness::{presets, run_experiment, run_in_memory, selftest, ExperimentConfig, RunStatus};
use vav_core::optim::{init_state, solve_omega, vav_position_update, vav_tilde_r, OmegaInputs, StepDetail, Variant};
use vav_core::rng::{sample_batch, RngStream};
use vav_core::{Objective, ParamVector};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn line(text: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{text}");
}

fn near(x: &[f64], target: [f64; 2], tol: f64) -> bool {
    (x[0] - target[0]).abs() <= tol && (x[1] - target[1]).abs() <= tol
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let cfgs = presets::rosenbrock_rows();
    let runs: Vec<_> = cfgs.iter().map(|c| run_in_memory(c).expect("table run").0).collect();
    let secs = started.elapsed().as_secs_f64();
    let targets = [None, Some([0.9846, 0.9693]), Some([0.9964, 0.9931]), Some([0.9843, 0.9688])];
    let mut ok = secs < 5.0;
    let mut parts = Vec::new();
    for (s, target) in runs.iter().zip(targets) {
        match target {
            None => {
                ok &= s.status == RunStatus::Diverged;
                parts.push(format!("{} {:?}", s.name, s.status));
            }
            Some(t) => {
                let x = s.final_x.as_deref().unwrap_or(&[f64::NAN, f64::NAN]).to_vec();
                ok &= s.status != RunStatus::Diverged && near(&x, t, 0.05);
                parts.push(format!("{} ({:.4}, {:.4})", s.name, x[0], x[1]));
            }
        }
    }
    outcome(ok, format!("{}; {secs:.2}s", parts.join(", ")))
}

/// Per-coordinate `r_tilde^2 - r^2 + (r_tilde - r)^2 + dx^2 / eta`, relative to `max(1, r^2)`.
fn residual(r: f64, rt: f64, dx: f64, eta: f64) -> f64 {
    (rt * rt - r * r + (rt - r) * (rt - r) + dx * dx / eta).abs() / (r * r).max(1.0)
}

/// Steps a shipped config and hands each detail to `visit`.
fn trace(cfg: &ExperimentConfig, mut visit: impl FnMut(&StepDetail)) {
    let (problem, x0) = cfg.build().unwrap();
    let mut state = init_state(&problem, x0, cfg.optimizer.hyper(), cfg.optimizer.kind, None).unwrap();
    for _ in 0..cfg.iterations {
        let out = state.step(&problem, None, None).unwrap();
        visit(out.detail.as_ref().unwrap());
    }
}

fn criterion_2() -> Outcome {
    let mut rng = RngStream::new(2);
    let mut worst = 0.0f64;
    let mut failed = 0usize;
    let mut total = 0usize;
    for _ in 0..10_000 {
        let r = rng.uniform(1e-3, 5.0);
        let g = rng.uniform(-10.0, 10.0);
        let f = rng.uniform(0.0, 10.0);
        let c = rng.uniform(1e-6, 1.0);
        let eta = 10f64.powf(rng.uniform(-3.0, 0.0));
        let rt = vav_tilde_r(&[r], &[g], f, c, eta).unwrap()[0];
        let dx = vav_position_update(&ParamVector::zeros(1), &[g], &[rt], f, c, &[eta]).unwrap()[0];
        let e = residual(r, rt, dx, eta);
        worst = worst.max(e);
        failed += usize::from(!(e < 1e-8));
        total += 1;
    }
    trace(&presets::rosenbrock_rows()[2], |d| {
        for i in 0..d.dim() {
            let e = residual(d.r[i], d.r_tilde[i], d.dx[i], d.lr[i]);
            worst = worst.max(e);
            failed += usize::from(!(e < 1e-8));
            total += 1;
        }
    });
    outcome(failed == 0, format!("{failed}/{total} residuals >= 1e-8, worst {worst:.2e}"))
}

/// Smallest grid point with `(w r_tilde + (1 - w) sqrt F)^2 - r_tilde^2 <= (psi/eta) dx^2`.
fn grid_omega(inp: &OmegaInputs) -> f64 {
    let s = inp.f_next.sqrt();
    let slack = inp.psi / inp.eta * inp.dx * inp.dx;
    (0..=10_000)
        .map(|k| k as f64 * 1e-4)
        .find(|&w| {
            let r = w * inp.r_tilde + (1.0 - w) * s;
            r * r - inp.r_tilde * inp.r_tilde <= slack
        })
        .unwrap_or(1.0)
}

fn criterion_3() -> Outcome {
    let mut rng = RngStream::new(3);
    let mut worst_gap = 0.0f64;
    let mut worst_q1 = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let f_next = 10f64.powf(rng.uniform(-4.0, 2.0));
        let inp = OmegaInputs {
            f_next,
            r_tilde: f_next.sqrt() * rng.uniform(0.0, 2.0),
            dx: rng.uniform(-1.0, 1.0),
            psi: rng.uniform(0.01, 0.99),
            eta: 10f64.powf(rng.uniform(-3.0, 0.0)),
        };
        let w = solve_omega(&inp).unwrap();
        worst_gap = worst_gap.max((w - grid_omega(&inp)).abs());
        // Q(1) from the expanded coefficients
        let s = f_next.sqrt();
        let a = (s - inp.r_tilde).powi(2);
        let b = 2.0 * s * (inp.r_tilde - s);
        let c = f_next - inp.r_tilde * inp.r_tilde - inp.psi / inp.eta * inp.dx * inp.dx;
        worst_q1 = worst_q1.max(a + b + c);
    }
    outcome(
        worst_gap <= 1e-3 && worst_q1 <= 1e-12,
        format!("max |omega - grid| {worst_gap:.2e}, max Q(1) {worst_q1:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut cfgs: Vec<ExperimentConfig> = presets::all()
        .into_iter()
        .filter(|c| c.optimizer.kind == Variant::Vav && c.batch_size.is_none())
        .collect();
    cfgs.sort_by_key(|c| c.display_name());
    let mut failed = 0usize;
    let mut total = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for cfg in &cfgs {
        let psi = cfg.optimizer.psi;
        trace(cfg, |d| {
            for i in 0..d.dim() {
                let (r, rt, rn, dx, eta) = (d.r[i], d.r_tilde[i], d.r_next[i], d.dx[i], d.lr[i]);
                let excess = rn * rn - r * r + (rt - r).powi(2) + (1.0 - psi) / eta * dx * dx;
                worst = worst.max(excess);
                failed += usize::from(!(excess <= 1e-8));
                total += 1;
            }
        });
    }
    let names: Vec<String> = cfgs.iter().map(|c| c.display_name()).collect();
    outcome(failed == 0, format!("{failed}/{total} violations over {}, worst excess {worst:.2e}", names.join(", ")))
}

/// Central differences, implemented here independently of the library oracle.
fn fd_ok(obj: &dyn Objective, x: &[f64], batch: Option<&vav_core::Batch>) -> bool {
    let g = obj.gradient(x, batch);
    let mut p = x.to_vec();
    let h = 1e-6;
    (0..x.len()).all(|i| {
        let orig = p[i];
        p[i] = orig + h;
        let up = obj.value(&p, batch);
        p[i] = orig - h;
        let down = obj.value(&p, batch);
        p[i] = orig;
        let n = (up - down) / (2.0 * h);
        let diff = (g[i] - n).abs();
        diff <= 1e-8 || diff <= 1e-4 * g[i].abs().max(n.abs())
    })
}

fn criterion_5() -> Outcome {
    let started = Instant::now();
    let mut rng = RngStream::new(5);
    let mut parts = Vec::new();
    let mut ok = true;
    let mut seen = Vec::new();
    for cfg in presets::all() {
        let (problem, x0) = cfg.build().unwrap();
        let key = format!("{:?}", cfg.problem);
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let mut passed = 0;
        for k in 0..100 {
            let x: Vec<f64> = match &problem {
                vav_core::harness::Problem::Regression(p) => p.init_params(1000 + k),
                _ => x0.iter().map(|_| rng.uniform(-2.5, 2.5)).collect(),
            };
            let batch = (problem.dataset_size() > 0).then(|| sample_batch(&mut rng, problem.dataset_size(), 32).unwrap());
            passed += usize::from(fd_ok(&problem, &x, batch.as_ref()));
        }
        ok &= passed == 100;
        parts.push(format!("{} {passed}/100", problem.name()));
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(ok && secs < 10.0, format!("{}; {secs:.2}s", parts.join(", ")))
}

fn criterion_6() -> Outcome {
    let (sgd, _) = run_in_memory(&presets::sine_sgd()).unwrap();
    let (vav, _) = run_in_memory(&presets::sine_vav()).unwrap();
    let ok = sgd.status == RunStatus::Diverged
        && vav.status != RunStatus::Diverged
        && vav.steps_executed == presets::STABILITY_ITERATIONS
        && vav.final_loss.is_some();
    let mut at_half = presets::sine_sgd();
    at_half.optimizer.eta = 0.5;
    let (half, _) = run_in_memory(&at_half).unwrap();
    outcome(
        ok,
        format!(
            "eta {}: sgd {} ({}), vav {} steps, final loss {:.3e}; info: sgd at eta 0.5 {:?}",
            presets::STABILITY_ETA,
            format!("{:?}", sgd.status).to_lowercase(),
            sgd.divergence.as_deref().unwrap_or("finite"),
            vav.steps_executed,
            vav.final_loss.unwrap_or(f64::NAN),
            half.status
        ),
    )
}

/// Returns the hard outcome and an optional soft warning.
fn criterion_7() -> (Outcome, Option<String>) {
    let (quad, records) = run_in_memory(&presets::quadratic_vav()).unwrap();
    let c = presets::quadratic_vav().optimizer.c;
    // r^2 <= loss + c at every recorded step, recomputed from the rows
    let bad = records.iter().filter(|r| r.r_max * r.r_max > r.batch_loss + c + 1e-9).count();
    let (mlp, _) = run_in_memory(&presets::sine_vav()).unwrap();
    let frac = mlp.violation_fraction.unwrap_or(f64::NAN);
    let warn = (!(frac <= 0.01)).then(|| format!("mini-batch violation fraction {frac} above 1%"));
    (
        outcome(
            bad == 0 && quad.violation_fraction == Some(0.0),
            format!("quadratic {bad}/{} steps violate; mini-batch MLP violation fraction {:.2}%", records.len(), 100.0 * frac),
        ),
        warn,
    )
}

fn metrics_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n == "metrics.csv") {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_9() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let report = selftest(&d.path().join("selftest")).unwrap();
        assert!(report.passed(), "{}", report.to_text());
        run_experiment(&presets::rosenbrock_rows()[2], &d.path().join("rosenbrock")).unwrap();
    }
    let a = metrics_files(dirs[0].path());
    let b = metrics_files(dirs[1].path());
    let same = !a.is_empty() && a == b;
    outcome(same, format!("{} metrics files compared, identical: {same}", a.len()))
}

fn main() {
    let mut failures = 0;
    let mut report = |n: u32, o: Outcome| {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        failures += usize::from(!o.passed);
        line(&format!("{tag} criterion {n}: {}", o.detail));
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    report(5, criterion_5());
    report(6, criterion_6());
    let (seven, warn) = criterion_7();
    report(7, seven);
    if let Some(w) = warn {
        line(&format!("WARN criterion 7: {w}"));
    }
    line("EXCLUDED criterion 8: large-scale image and physics-informed benchmarks and rate constants are out of scope; covered by criteria 2-7");
    report(9, criterion_9());
    if failures > 0 {
        line(&format!("{failures} acceptance criteria failed"));
        std::process::exit(1);
    }
}
