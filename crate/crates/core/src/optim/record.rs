use serde::{Deserialize, Serialize};

use super::omega::OmegaInputs;

/// Per-iteration telemetry. One row of the metrics CSV.
///
/// `r_*` describe the auxiliary variable entering the step, so they pair
/// with `batch_loss` (loss at the entering iterate on the step's batch).
/// `rho = r_tilde / sqrt(f + c)` and `lr = (per-coordinate step size) * rho`
/// is the multiplier actually applied to the gradient. SGD rows use the
/// reduction `r = r_tilde = sqrt(f + c)`: `rho = 1`, `omega = 0`, residual 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub batch_loss: f64,
    #[serde(skip)]
    pub full_batch: bool,
    pub grad_norm: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub r_mean: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    #[serde(rename = "lr_min")]
    pub effective_lr_min: f64,
    #[serde(rename = "lr_max")]
    pub effective_lr_max: f64,
    pub dissipation_residual: f64,
}

/// Exact CSV header of the metrics file.
pub const METRICS_HEADER: [&str; 13] = [
    "step",
    "batch_loss",
    "grad_norm",
    "r_min",
    "r_max",
    "r_mean",
    "rho_min",
    "rho_max",
    "omega_min",
    "omega_max",
    "lr_min",
    "lr_max",
    "dissipation_residual",
];

/// Per-coordinate internals of one auxiliary-variable step, for auditing.
///
/// For the scalar scheme every vector has length one and `dx_sq` holds
/// `||dx||^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDetail {
    pub step: u64,
    /// Default step size.
    pub eta: f64,
    pub psi: f64,
    pub c: f64,
    /// `f(x_t; xi_t) + c`.
    pub f_offset: f64,
    /// `f(x_{t+1}; xi_{t+1}) + c`; `None` for the unrelaxed scheme.
    pub f_next_offset: Option<f64>,
    /// Step size used per coordinate (the scheduler may lower it).
    pub lr: Vec<f64>,
    pub r: Vec<f64>,
    pub r_tilde: Vec<f64>,
    pub r_next: Vec<f64>,
    pub dx: Vec<f64>,
    pub dx_sq: Vec<f64>,
    pub omega: Vec<f64>,
}

impl StepDetail {
    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn is_relaxed(&self) -> bool {
        self.f_next_offset.is_some()
    }

    /// `r_tilde^2 - r^2 + (r_tilde - r)^2 + dx^2 / lr` for coordinate `i`.
    pub fn dissipation_residual(&self, i: usize) -> f64 {
        let (r, rt) = (self.r[i], self.r_tilde[i]);
        let motion = if self.lr[i] > 0.0 { self.dx_sq[i] / self.lr[i] } else { 0.0 };
        rt * rt - r * r + (rt - r) * (rt - r) + motion
    }

    /// Residual divided by `max(1, r^2)`.
    pub fn relative_dissipation_residual(&self, i: usize) -> f64 {
        self.dissipation_residual(i).abs() / (self.r[i] * self.r[i]).max(1.0)
    }

    /// Relaxation solve inputs for coordinate `i`.
    pub fn omega_inputs(&self, i: usize) -> Option<OmegaInputs> {
        let f_next = self.f_next_offset?;
        Some(OmegaInputs {
            f_next,
            r_tilde: self.r_tilde[i],
            dx: self.dx[i],
            psi: self.psi,
            eta: if self.lr[i] > 0.0 { self.lr[i] } else { self.eta },
        })
    }
}

/// What one optimizer step produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub record: StepRecord,
    /// Absent for plain SGD.
    pub detail: Option<StepDetail>,
}

pub(crate) fn min_max_mean(values: &[f64]) -> (f64, f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
    }
    (lo, hi, sum / values.len() as f64)
}
