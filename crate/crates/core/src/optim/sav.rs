//! Scalar auxiliary variable scheme (unrelaxed):
//!
//! ```text
//! x' = x - eta * r' / sqrt(f + c) * g
//! r' = r + <g, x' - x> / (2 sqrt(f + c))
//! ```
//!
//! Substituting the first line into the second gives the closed form used
//! here, `r' = r / (1 + eta ||g||^2 / (2 (f + c)))`.

use crate::error::{Error, Result};
use crate::objective::{evaluate, Batch, Objective};
use crate::params::ParamVector;

use super::record::{StepDetail, StepOutcome, StepRecord};
use super::scheduler::scheduler_effective_lr;
use super::{initial_r, Hyper};

pub fn sav_tilde_r(r: f64, grad: &[f64], f_batch: f64, c: f64, eta: f64) -> Result<f64> {
    let fc = f_batch + c;
    if !(fc > 0.0) {
        return Err(Error::Domain { value: fc });
    }
    let g2: f64 = grad.iter().map(|g| g * g).sum();
    Ok(r / (1.0 + eta * g2 / (2.0 * fc)))
}

#[derive(Debug, Clone)]
pub struct SavState {
    pub x: ParamVector,
    pub r: f64,
    pub hyper: Hyper,
    pub step: u64,
}

impl SavState {
    pub fn init<O: Objective + ?Sized>(
        obj: &O,
        x0: ParamVector,
        hyper: Hyper,
        batch0: Option<&Batch>,
    ) -> Result<Self> {
        hyper.validate()?;
        let r = initial_r(obj, &x0, hyper.c, batch0)?;
        Ok(Self { x: x0, r, hyper, step: 0 })
    }

    pub fn step<O: Objective + ?Sized>(&mut self, obj: &O, batch: Option<&Batch>) -> Result<StepOutcome> {
        let t = self.step;
        self.try_step(obj, batch).map_err(|e| e.at_step(t))
    }

    fn try_step<O: Objective + ?Sized>(&mut self, obj: &O, batch: Option<&Batch>) -> Result<StepOutcome> {
        let Hyper { eta, c, scheduler, .. } = self.hyper;
        let eval = evaluate(obj, &self.x, batch)?;
        let fc = eval.loss + c;
        let lr = if scheduler { scheduler_effective_lr(self.r, c, eta) } else { eta };
        let r_next = if lr > 0.0 { sav_tilde_r(self.r, &eval.grad, eval.loss, c, lr)? } else { self.r };
        if fc <= 0.0 {
            return Err(Error::Domain { value: fc });
        }
        let rho = r_next / fc.sqrt();
        let x_next = ParamVector::from_update(
            self.x.iter().zip(eval.grad.iter()).map(|(x, g)| x - lr * rho * g).collect(),
        )?;
        let dx_sq: f64 = x_next.iter().zip(self.x.iter()).map(|(a, b)| (a - b) * (a - b)).sum();

        let detail = StepDetail {
            step: self.step,
            eta,
            psi: self.hyper.psi,
            c,
            f_offset: fc,
            f_next_offset: None,
            lr: vec![lr],
            r: vec![self.r],
            r_tilde: vec![r_next],
            r_next: vec![r_next],
            dx: vec![dx_sq.sqrt()],
            dx_sq: vec![dx_sq],
            omega: vec![1.0],
        };
        let record = StepRecord {
            step: self.step,
            batch_loss: eval.loss,
            full_batch: batch.is_none(),
            grad_norm: eval.grad.norm_sq().sqrt(),
            r_min: self.r,
            r_max: self.r,
            r_mean: self.r,
            rho_min: rho,
            rho_max: rho,
            omega_min: 1.0,
            omega_max: 1.0,
            effective_lr_min: lr * rho,
            effective_lr_max: lr * rho,
            dissipation_residual: detail.relative_dissipation_residual(0),
        };
        self.x = x_next;
        self.r = r_next;
        self.step += 1;
        Ok(StepOutcome { record, detail: Some(detail) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticProblem;

    #[test]
    fn closed_form_examples() {
        assert_eq!(sav_tilde_r(0.7, &[0.0, 0.0], 1.0, 0.0, 0.3).unwrap(), 0.7);
        // r = 1, eta = 1, ||g||^2 = 2, f + c = 1
        assert_eq!(sav_tilde_r(1.0, &[1.0, 1.0], 1.0, 0.0, 1.0).unwrap(), 0.5);
        assert!(matches!(sav_tilde_r(1.0, &[1.0], 0.0, 0.0, 1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let q = QuadraticProblem::identity(2);
        let mut s = SavState::init(&q, ParamVector::zeros(2), Hyper { c: 1.0, ..Hyper::new(0.1) }, None).unwrap();
        assert_eq!(s.r, 1.0);
        s.step(&q, None).unwrap();
        assert_eq!(s.x.as_slice(), &[0.0, 0.0]);
        assert_eq!(s.r, 1.0);
    }

    #[test]
    fn quadratic_bowl_r_strictly_decreases() {
        let q = QuadraticProblem::diagonal(&[1.0, 4.0, 0.5], 0.0).unwrap();
        let x0 = ParamVector::new(vec![1.0, -2.0, 3.0]).unwrap();
        let mut s = SavState::init(&q, x0, Hyper::new(0.2), None).unwrap();
        let mut prev = s.r;
        for _ in 0..100 {
            let out = s.step(&q, None).unwrap();
            assert!(out.record.dissipation_residual < 1e-12);
            assert!(s.r < prev, "r must strictly decrease");
            prev = s.r;
        }
    }
}
