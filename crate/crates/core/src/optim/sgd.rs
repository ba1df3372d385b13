use crate::error::{Error, Result};
use crate::objective::{evaluate, Batch, Objective};
use crate::params::ParamVector;

use super::record::{StepOutcome, StepRecord};
use super::Hyper;

/// `x - eta * grad`.
pub fn sgd_step(x: &ParamVector, grad: &[f64], eta: f64) -> Result<ParamVector> {
    if grad.len() != x.dim() {
        return Err(Error::Contract(format!("gradient has {} entries, x has {}", grad.len(), x.dim())));
    }
    if !(eta > 0.0) {
        return Err(Error::Contract(format!("eta must be positive, got {eta}")));
    }
    Ok(ParamVector::from_update(x.iter().zip(grad).map(|(xi, gi)| xi - eta * gi).collect())?)
}

#[derive(Debug, Clone)]
pub struct SgdState {
    pub x: ParamVector,
    pub hyper: Hyper,
    pub step: u64,
}

impl SgdState {
    pub fn new(x: ParamVector, hyper: Hyper) -> Result<Self> {
        hyper.validate()?;
        Ok(Self { x, hyper, step: 0 })
    }

    pub fn step<O: Objective + ?Sized>(&mut self, obj: &O, batch: Option<&Batch>) -> Result<StepOutcome> {
        let t = self.step;
        let eval = evaluate(obj, &self.x, batch).map_err(|e| e.at_step(t))?;
        let x_next = sgd_step(&self.x, &eval.grad, self.hyper.eta).map_err(|e| e.at_step(t))?;
        let r = (eval.loss + self.hyper.c).max(0.0).sqrt();
        let record = StepRecord {
            step: t,
            batch_loss: eval.loss,
            full_batch: batch.is_none(),
            grad_norm: eval.grad.norm_sq().sqrt(),
            r_min: r,
            r_max: r,
            r_mean: r,
            rho_min: 1.0,
            rho_max: 1.0,
            omega_min: 0.0,
            omega_max: 0.0,
            effective_lr_min: self.hyper.eta,
            effective_lr_max: self.hyper.eta,
            dissipation_residual: 0.0,
        };
        self.x = x_next;
        self.step += 1;
        Ok(StepOutcome { record, detail: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn arithmetic() {
        assert_eq!(sgd_step(&pv(&[0.0, 0.0]), &[0.0, 0.0], 0.1).unwrap(), pv(&[0.0, 0.0]));
        assert_eq!(sgd_step(&pv(&[1.0, 1.0]), &[2.0, -4.0], 0.5).unwrap(), pv(&[0.0, 3.0]));
    }

    #[test]
    fn overflow_is_divergence() {
        let err = sgd_step(&pv(&[1.0]), &[f64::MAX], 10.0).unwrap_err();
        assert!(err.is_divergence());
    }

    #[test]
    fn shape_mismatch() {
        assert!(matches!(sgd_step(&pv(&[1.0]), &[1.0, 2.0], 0.1), Err(Error::Contract(_))));
    }
}
