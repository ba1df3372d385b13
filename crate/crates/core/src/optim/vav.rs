//! Elementwise relaxed auxiliary variable method.
//!
//! One step, per coordinate `i`, with `F = f(x; xi_t) + c`:
//!
//! ```text
//! r_tilde_i = r_i / (1 + eta_i g_i^2 / (2F))
//! x'_i      = x_i - eta_i (r_tilde_i / sqrt(F)) g_i
//! r'_i      = w_i r_tilde_i + (1 - w_i) sqrt(f(x'; xi_{t+1}) + c)
//! ```
//!
//! `eta_i` is the default rate, or its scheduler cap. The first two lines
//! are the implicit pair `x' - x = -eta r_tilde g / sqrt(F)`,
//! `r_tilde - r = g (x' - x) / (2 sqrt(F))` solved in closed form; that pair
//! is what makes `r_tilde^2 - r^2 = -(r_tilde - r)^2 - (x' - x)^2 / eta` hold.

use crate::error::{Error, Result};
use crate::objective::{evaluate, evaluate_loss, Batch, Objective};
use crate::params::ParamVector;

use super::omega::{solve_omega, OmegaInputs};
use super::record::{min_max_mean, StepDetail, StepOutcome, StepRecord};
use super::scheduler::scheduler_effective_lr;
use super::{initial_r, Hyper};

#[inline]
fn tilde_r_coord(r: f64, g: f64, fc: f64, eta: f64) -> f64 {
    r / (1.0 + eta * g * g / (2.0 * fc))
}

fn check_offset(f: f64, c: f64) -> Result<f64> {
    let fc = f + c;
    if fc > 0.0 {
        Ok(fc)
    } else {
        Err(Error::Domain { value: fc })
    }
}

/// Unrelaxed auxiliary update for every coordinate with one step size.
pub fn vav_tilde_r(r: &[f64], grad: &[f64], f_batch: f64, c: f64, eta: f64) -> Result<Vec<f64>> {
    if r.len() != grad.len() {
        return Err(Error::Contract(format!("r has {} entries, gradient {}", r.len(), grad.len())));
    }
    let fc = check_offset(f_batch, c)?;
    Ok(r.iter().zip(grad).map(|(&ri, &gi)| tilde_r_coord(ri, gi, fc, eta)).collect())
}

/// `x_i - lr_i (r_tilde_i / sqrt(f + c)) g_i`. `lr` holds one rate or one per coordinate.
pub fn vav_position_update(
    x: &ParamVector,
    grad: &[f64],
    r_tilde: &[f64],
    f_batch: f64,
    c: f64,
    lr: &[f64],
) -> Result<ParamVector> {
    let n = x.dim();
    if grad.len() != n || r_tilde.len() != n || !(lr.len() == n || lr.len() == 1) {
        return Err(Error::Contract("vav_position_update: shape mismatch".into()));
    }
    if r_tilde.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("r_tilde must be finite".into()));
    }
    let sqrt_fc = check_offset(f_batch, c)?.sqrt();
    let rate = |i: usize| if lr.len() == 1 { lr[0] } else { lr[i] };
    let next = (0..n).map(|i| x[i] - rate(i) * (r_tilde[i] / sqrt_fc) * grad[i]).collect();
    Ok(ParamVector::from_update(next)?)
}

/// Convex combination `w_i r_tilde_i + (1 - w_i) sqrt(f + c)`.
pub fn relax_r(r_tilde: &[f64], f_next: f64, c: f64, omega: &[f64]) -> Result<Vec<f64>> {
    if r_tilde.len() != omega.len() {
        return Err(Error::Contract("relax_r: shape mismatch".into()));
    }
    if let Some(w) = omega.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::Contract(format!("relaxation weight {w} outside [0, 1]")));
    }
    let target = check_offset(f_next, c)?.sqrt();
    Ok(r_tilde.iter().zip(omega).map(|(&rt, &w)| w * rt + (1.0 - w) * target).collect())
}

#[derive(Debug, Clone)]
pub struct VavState {
    pub x: ParamVector,
    pub r: Vec<f64>,
    pub hyper: Hyper,
    pub step: u64,
}

impl VavState {
    /// `r = sqrt(f(x0) + c) * (1, ..., 1)`; `batch0` selects the loss for mini-batch problems.
    pub fn init<O: Objective + ?Sized>(
        obj: &O,
        x0: ParamVector,
        hyper: Hyper,
        batch0: Option<&Batch>,
    ) -> Result<Self> {
        hyper.validate()?;
        let r0 = initial_r(obj, &x0, hyper.c, batch0)?;
        let r = vec![r0; x0.dim()];
        Ok(Self { x: x0, r, hyper, step: 0 })
    }

    /// Full iteration. Mini-batch callers pass the batch they will use for
    /// the next step as `batch_next`; deterministic callers pass `None` twice.
    pub fn step<O: Objective + ?Sized>(
        &mut self,
        obj: &O,
        batch_t: Option<&Batch>,
        batch_next: Option<&Batch>,
    ) -> Result<StepOutcome> {
        let t = self.step;
        self.try_step(obj, batch_t, batch_next).map_err(|e| e.at_step(t))
    }

    fn try_step<O: Objective + ?Sized>(
        &mut self,
        obj: &O,
        batch_t: Option<&Batch>,
        batch_next: Option<&Batch>,
    ) -> Result<StepOutcome> {
        let Hyper { eta, psi, c, scheduler } = self.hyper;
        let n = self.x.dim();

        let eval = evaluate(obj, &self.x, batch_t)?;
        let fc = check_offset(eval.loss, c)?;
        let sqrt_fc = fc.sqrt();

        let lr: Vec<f64> = if scheduler {
            self.r.iter().map(|&ri| scheduler_effective_lr(ri, c, eta)).collect()
        } else {
            vec![eta; n]
        };
        let r_tilde: Vec<f64> = (0..n).map(|i| tilde_r_coord(self.r[i], eval.grad[i], fc, lr[i])).collect();
        let x_next = vav_position_update(&self.x, &eval.grad, &r_tilde, eval.loss, c, &lr)?;

        let f_next = evaluate_loss(obj, &x_next, batch_next)?;
        let f_next_offset = check_offset(f_next, c)?;

        let dx: Vec<f64> = x_next.iter().zip(self.x.iter()).map(|(a, b)| a - b).collect();
        let omega = (0..n)
            .map(|i| {
                solve_omega(&OmegaInputs {
                    f_next: f_next_offset,
                    r_tilde: r_tilde[i],
                    dx: dx[i],
                    psi,
                    // a frozen coordinate has dx = 0, so any positive rate gives zero slack
                    eta: if lr[i] > 0.0 { lr[i] } else { eta },
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let r_next = relax_r(&r_tilde, f_next, c, &omega)?;

        let detail = StepDetail {
            step: self.step,
            eta,
            psi,
            c,
            f_offset: fc,
            f_next_offset: Some(f_next_offset),
            dx_sq: dx.iter().map(|d| d * d).collect(),
            lr,
            r: self.r.clone(),
            r_tilde,
            r_next,
            dx,
            omega,
        };

        let rho: Vec<f64> = detail.r_tilde.iter().map(|rt| rt / sqrt_fc).collect();
        let eff: Vec<f64> = rho.iter().zip(&detail.lr).map(|(p, l)| p * l).collect();
        let (r_min, r_max, r_mean) = min_max_mean(&self.r);
        let (rho_min, rho_max, _) = min_max_mean(&rho);
        let (omega_min, omega_max, _) = min_max_mean(&detail.omega);
        let (lr_min, lr_max, _) = min_max_mean(&eff);
        let residual = (0..n).map(|i| detail.relative_dissipation_residual(i)).fold(0.0, f64::max);
        let record = StepRecord {
            step: self.step,
            batch_loss: eval.loss,
            full_batch: batch_t.is_none(),
            grad_norm: eval.grad.norm_sq().sqrt(),
            r_min,
            r_max,
            r_mean,
            rho_min,
            rho_max,
            omega_min,
            omega_max,
            effective_lr_min: lr_min,
            effective_lr_max: lr_max,
            dissipation_residual: residual,
        };

        self.x = x_next;
        self.r = detail.r_next.clone();
        self.step += 1;
        Ok(StepOutcome { record, detail: Some(detail) })
    }
}
