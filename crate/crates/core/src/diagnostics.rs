//! Invariant checkers over a run's step stream.
//!
//! Checkers only read [`StepDetail`]s and [`StepRecord`]s; they never
//! touch optimizer state. Reports are data, never panics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::optim::{OmegaInputs, StepDetail, StepOutcome, StepRecord, DISCRIMINANT_TOLERANCE};

/// Identity checks: relative to `max(1, r^2)`.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Inequality checks: absolute on the `r^2` scale.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Combined per-step decrease of `r^2`.
pub const MONOTONICITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportContext {
    Coordinate(usize),
    Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub name: String,
    pub step: u64,
    pub observed: f64,
    pub bound: f64,
    pub passed: bool,
    pub context: ReportContext,
    /// Everything needed to recompute the check in isolation.
    pub inputs: BTreeMap<String, f64>,
}

impl InvariantReport {
    fn new(name: &str, step: u64, observed: f64, bound: f64, context: ReportContext) -> Self {
        Self {
            name: name.to_owned(),
            step,
            observed,
            bound,
            passed: observed <= bound,
            context,
            inputs: BTreeMap::new(),
        }
    }

    fn with(mut self, inputs: &[(&str, f64)]) -> Self {
        self.inputs.extend(inputs.iter().map(|(k, v)| (k.to_string(), *v)));
        self
    }
}

fn context(detail: &StepDetail, i: usize) -> ReportContext {
    if detail.is_relaxed() {
        ReportContext::Coordinate(i)
    } else {
        ReportContext::Scalar
    }
}

fn detail_inputs(d: &StepDetail, i: usize) -> Vec<(&'static str, f64)> {
    vec![
        ("r", d.r[i]),
        ("r_tilde", d.r_tilde[i]),
        ("r_next", d.r_next[i]),
        ("dx_sq", d.dx_sq[i]),
        ("lr", d.lr[i]),
        ("psi", d.psi),
        ("c", d.c),
        ("f_offset", d.f_offset),
    ]
}

/// `|r_tilde^2 - r^2 + (r_tilde - r)^2 + dx^2 / eta| / max(1, r^2) <= tol`
/// for every coordinate of every step.
pub fn check_dissipation<'a>(
    details: impl IntoIterator<Item = &'a StepDetail>,
    tol: f64,
) -> Vec<InvariantReport> {
    let mut out = Vec::new();
    for d in details {
        for i in 0..d.dim() {
            out.push(
                InvariantReport::new("dissipation_identity", d.step, d.relative_dissipation_residual(i), tol, context(d, i))
                    .with(&detail_inputs(d, i)),
            );
        }
    }
    out
}

/// Relaxation bound and combined decrease of `r^2`, per coordinate:
///
/// - `r'^2 - r_tilde^2 - (psi / eta) dx^2 <= tol_feasible`
/// - `r'^2 - r^2 + (r_tilde - r)^2 + ((1 - psi) / eta) dx^2 <= tol_monotone`
pub fn check_relaxation<'a>(
    details: impl IntoIterator<Item = &'a StepDetail>,
    tol_feasible: f64,
    tol_monotone: f64,
) -> Vec<InvariantReport> {
    let mut out = Vec::new();
    for d in details.into_iter().filter(|d| d.is_relaxed()) {
        for i in 0..d.dim() {
            let (r, rt, rn) = (d.r[i], d.r_tilde[i], d.r_next[i]);
            let per_lr = if d.lr[i] > 0.0 { d.dx_sq[i] / d.lr[i] } else { 0.0 };
            let feasible = rn * rn - rt * rt - d.psi * per_lr;
            let monotone = rn * rn - r * r + (rt - r) * (rt - r) + (1.0 - d.psi) * per_lr;
            let inputs = detail_inputs(d, i);
            out.push(InvariantReport::new("relaxation_bound", d.step, feasible, tol_feasible, context(d, i)).with(&inputs));
            out.push(InvariantReport::new("energy_decrease", d.step, monotone, tol_monotone, context(d, i)).with(&inputs));
        }
    }
    out
}

/// One relaxation solve: its inputs and the weight that was used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaSolve {
    pub step: u64,
    pub coordinate: usize,
    pub inputs: OmegaInputs,
    pub omega: f64,
}

impl StepDetail {
    pub fn omega_solves(&self) -> impl Iterator<Item = OmegaSolve> + '_ {
        (0..self.dim()).filter_map(move |i| {
            self.omega_inputs(i).map(|inputs| OmegaSolve { step: self.step, coordinate: i, inputs, omega: self.omega[i] })
        })
    }
}

/// Per solve: `omega` in `[0, 1]`, `Q(omega) <= tol`, `Q(1) <= tol` (both
/// scaled by `max(1, F)`), discriminant not negative beyond rounding.
pub fn audit_omega(solves: impl IntoIterator<Item = OmegaSolve>, tol: f64) -> Vec<InvariantReport> {
    let mut out = Vec::new();
    for s in solves {
        let q = s.inputs.quadratic();
        let scale = s.inputs.f_next.max(1.0);
        let ctx = ReportContext::Coordinate(s.coordinate);
        let inputs = [
            ("f_next", s.inputs.f_next),
            ("r_tilde", s.inputs.r_tilde),
            ("dx", s.inputs.dx),
            ("psi", s.inputs.psi),
            ("eta", s.inputs.eta),
            ("omega", s.omega),
        ];
        let range_gap = if (0.0..=1.0).contains(&s.omega) { 0.0 } else { (s.omega - s.omega.clamp(0.0, 1.0)).abs() };
        let q_omega = if s.inputs.is_degenerate() { 0.0 } else { q.eval(s.omega) };
        out.push(InvariantReport::new("omega_range", s.step, range_gap, 0.0, ctx).with(&inputs));
        out.push(InvariantReport::new("omega_feasible", s.step, q_omega, tol * scale, ctx).with(&inputs));
        out.push(InvariantReport::new("q_at_one", s.step, q.eval(1.0), tol * scale, ctx).with(&inputs));
        out.push(
            InvariantReport::new(
                "discriminant",
                s.step,
                -q.discriminant(),
                DISCRIMINANT_TOLERANCE * q.discriminant_scale(),
                ctx,
            )
            .with(&inputs),
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundEntry {
    pub step: u64,
    pub batch_loss: f64,
    pub r_squared_max: f64,
    pub violated: bool,
}

/// Whether `r^2` stayed under the observed loss: `violated` iff
/// `r_max^2 > batch_loss + c + tol`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundTrace {
    pub entries: Vec<LowerBoundEntry>,
}

impl LowerBoundTrace {
    pub fn push(&mut self, record: &StepRecord, c: f64, tol: f64) {
        let r_squared_max = record.r_max * record.r_max;
        self.entries.push(LowerBoundEntry {
            step: record.step,
            batch_loss: record.batch_loss,
            r_squared_max,
            violated: r_squared_max > record.batch_loss + c + tol,
        });
    }

    pub fn violations(&self) -> usize {
        self.entries.iter().filter(|e| e.violated).count()
    }

    pub fn violation_fraction(&self) -> f64 {
        if self.entries.is_empty() {
            0.0
        } else {
            self.violations() as f64 / self.entries.len() as f64
        }
    }
}

pub fn track_lower_bound<'a>(records: impl IntoIterator<Item = &'a StepRecord>, c: f64, tol: f64) -> LowerBoundTrace {
    let mut trace = LowerBoundTrace::default();
    for r in records {
        trace.push(r, c, tol);
    }
    trace
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Checker {
    Dissipation,
    Omega,
    Relaxation,
    LowerBound,
}

impl Checker {
    pub const ALL: [Checker; 4] = [Checker::Dissipation, Checker::Omega, Checker::Relaxation, Checker::LowerBound];

    pub fn name(self) -> &'static str {
        match self {
            Checker::Dissipation => "dissipation",
            Checker::Omega => "omega",
            Checker::Relaxation => "relaxation",
            Checker::LowerBound => "lower_bound",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckerTally {
    pub checked: u64,
    pub failed: u64,
}

/// Streaming audit of a run: counts every check, keeps the first failures.
#[derive(Debug, Clone)]
pub struct Auditor {
    checkers: Vec<Checker>,
    c: f64,
    lower_bound_tol: f64,
    max_kept: usize,
    tallies: BTreeMap<&'static str, CheckerTally>,
    failures: Vec<InvariantReport>,
    lower_bound: LowerBoundTrace,
}

/// What an [`Auditor`] saw.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub tallies: BTreeMap<String, CheckerTally>,
    pub failures: Vec<InvariantReport>,
    /// Fraction of steps with `r^2 > loss + c`, when that checker ran.
    pub lower_bound_violation_fraction: Option<f64>,
}

impl AuditSummary {
    /// Failures of the hard checks; the lower-bound tracker is excluded.
    pub fn hard_failures(&self) -> u64 {
        self.tallies.iter().filter(|(k, _)| k.as_str() != "lower_bound").map(|(_, t)| t.failed).sum()
    }
}

impl Auditor {
    pub fn new(checkers: &[Checker], c: f64, lower_bound_tol: f64) -> Self {
        let mut checkers = checkers.to_vec();
        checkers.sort();
        checkers.dedup();
        Self {
            checkers,
            c,
            lower_bound_tol,
            max_kept: 100,
            tallies: BTreeMap::new(),
            failures: Vec::new(),
            lower_bound: LowerBoundTrace::default(),
        }
    }

    fn absorb(&mut self, checker: Checker, reports: Vec<InvariantReport>) {
        let tally = self.tallies.entry(checker.name()).or_default();
        for r in reports {
            tally.checked += 1;
            if !r.passed {
                tally.failed += 1;
                if self.failures.len() < self.max_kept {
                    self.failures.push(r);
                }
            }
        }
    }

    pub fn observe(&mut self, outcome: &StepOutcome) {
        for checker in self.checkers.clone() {
            match (checker, &outcome.detail) {
                (Checker::Dissipation, Some(d)) => {
                    let reports = check_dissipation([d], IDENTITY_TOL);
                    self.absorb(checker, reports);
                }
                (Checker::Omega, Some(d)) => {
                    let reports = audit_omega(d.omega_solves(), INEQUALITY_TOL);
                    self.absorb(checker, reports);
                }
                (Checker::Relaxation, Some(d)) => {
                    let reports = check_relaxation([d], INEQUALITY_TOL, MONOTONICITY_TOL);
                    self.absorb(checker, reports);
                }
                (Checker::LowerBound, _) => {
                    self.lower_bound.push(&outcome.record, self.c, self.lower_bound_tol);
                    let tally = self.tallies.entry(checker.name()).or_default();
                    tally.checked += 1;
                    if self.lower_bound.entries.last().is_some_and(|e| e.violated) {
                        tally.failed += 1;
                    }
                }
                _ => {}
            }
        }
    }

    pub fn lower_bound(&self) -> &LowerBoundTrace {
        &self.lower_bound
    }

    pub fn finish(self) -> AuditSummary {
        let has_lb = self.checkers.contains(&Checker::LowerBound);
        AuditSummary {
            tallies: self.tallies.into_iter().map(|(k, v)| (k.to_owned(), v)).collect(),
            failures: self.failures,
            lower_bound_violation_fraction: has_lb.then(|| self.lower_bound.violation_fraction()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{solve_omega, Hyper, SavState, VavState};
    use crate::params::ParamVector;
    use crate::problems::QuadraticProblem;

    fn sav_details(steps: usize) -> Vec<StepDetail> {
        let q = QuadraticProblem::diagonal(&[1.0, 3.0], 0.0).unwrap();
        let mut s = SavState::init(&q, ParamVector::new(vec![2.0, -1.0]).unwrap(), Hyper::new(0.3), None).unwrap();
        (0..steps).map(|_| s.step(&q, None).unwrap().detail.unwrap()).collect()
    }

    #[test]
    fn sav_quadratic_identity_holds() {
        let details = sav_details(100);
        let reports = check_dissipation(&details, IDENTITY_TOL);
        assert_eq!(reports.len(), 100);
        assert!(reports.iter().all(|r| r.passed && r.context == ReportContext::Scalar));
    }

    #[test]
    fn corrupted_r_tilde_fails() {
        let mut details = sav_details(3);
        details[1].r_tilde[0] += 1e-3;
        let reports = check_dissipation(&details, IDENTITY_TOL);
        assert!(!reports[1].passed);
        assert!(reports[0].passed && reports[2].passed);
        assert_eq!(reports[1].step, 1);
        assert!(reports[1].inputs.contains_key("r_tilde"));
    }

    #[test]
    fn degenerate_solve_passes_audit() {
        let inputs = OmegaInputs { f_next: 4.0, r_tilde: 2.0, dx: 0.1, psi: 0.95, eta: 0.1 };
        let omega = solve_omega(&inputs).unwrap();
        assert_eq!(omega, 0.0);
        let reports = audit_omega([OmegaSolve { step: 0, coordinate: 0, inputs, omega }], INEQUALITY_TOL);
        assert!(reports.iter().all(|r| r.passed), "{reports:?}");
    }

    #[test]
    fn out_of_range_omega_fails() {
        let inputs = OmegaInputs { f_next: 2.0, r_tilde: 0.4, dx: 0.05, psi: 0.95, eta: 0.1 };
        let reports = audit_omega([OmegaSolve { step: 7, coordinate: 3, inputs, omega: 1.5 }], INEQUALITY_TOL);
        let range = reports.iter().find(|r| r.name == "omega_range").unwrap();
        assert!(!range.passed);
        assert_eq!(range.context, ReportContext::Coordinate(3));
    }

    #[test]
    fn quadratic_vav_run_is_clean() {
        let q = QuadraticProblem::diagonal(&[1.0, 10.0, 0.1], 0.0).unwrap();
        let mut st = VavState::init(&q, ParamVector::new(vec![1.0, 1.0, 1.0]).unwrap(), Hyper::new(0.15), None).unwrap();
        let mut auditor = Auditor::new(&Checker::ALL, 0.0, INEQUALITY_TOL);
        for _ in 0..500 {
            let out = st.step(&q, None, None).unwrap();
            auditor.observe(&out);
        }
        let summary = auditor.finish();
        assert_eq!(summary.hard_failures(), 0, "{:?}", summary.failures.first());
        assert_eq!(summary.lower_bound_violation_fraction, Some(0.0));
        assert_eq!(summary.tallies["dissipation"].checked, 1500);
    }

    #[test]
    fn lower_bound_uses_offset() {
        let mut rec = StepRecord {
            step: 0,
            batch_loss: 1.0,
            full_batch: true,
            grad_norm: 0.0,
            r_min: 1.2,
            r_max: 1.2,
            r_mean: 1.2,
            rho_min: 1.0,
            rho_max: 1.0,
            omega_min: 0.0,
            omega_max: 0.0,
            effective_lr_min: 0.1,
            effective_lr_max: 0.1,
            dissipation_residual: 0.0,
        };
        assert_eq!(track_lower_bound([&rec], 0.0, 1e-9).violations(), 1);
        assert_eq!(track_lower_bound([&rec], 0.5, 1e-9).violations(), 0);
        rec.r_max = 0.9;
        assert_eq!(track_lower_bound([&rec], 0.0, 1e-9).violation_fraction(), 0.0);
    }
}
