//! SGD, the scalar auxiliary variable (SAV) scheme and the elementwise
//! relaxed vector auxiliary variable (VAV) method.

mod omega;
mod record;
mod sav;
mod scheduler;
mod sgd;
mod vav;

pub use omega::{solve_omega, OmegaInputs, Quadratic, A_ZERO_THRESHOLD, DISCRIMINANT_TOLERANCE};
pub use record::{StepDetail, StepOutcome, StepRecord, METRICS_HEADER};
pub use sav::{sav_tilde_r, SavState};
pub use scheduler::scheduler_effective_lr;
pub use sgd::{sgd_step, SgdState};
pub use vav::{relax_r, vav_position_update, vav_tilde_r, VavState};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{evaluate_loss, Batch, Objective};
use crate::params::ParamVector;

/// Hyperparameters shared by the optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    /// Default learning rate.
    pub eta: f64,
    /// Relaxation parameter in `(0, 1)`; VAV only.
    pub psi: f64,
    /// Nonnegative offset under the square root.
    pub c: f64,
    /// Cap each step size by `sqrt(r^2 - c)`.
    pub scheduler: bool,
}

impl Default for Hyper {
    fn default() -> Self {
        Self { eta: 0.01, psi: 0.95, c: 0.0, scheduler: false }
    }
}

impl Hyper {
    pub fn new(eta: f64) -> Self {
        Self { eta, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.psi > 0.0 && self.psi < 1.0) {
            return Err(Error::config(format!("psi must lie in (0, 1), got {}", self.psi)));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::config(format!("c must be >= 0, got {}", self.c)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Sgd,
    Sav,
    Vav,
}

/// Any of the three optimizers, driven through one interface.
#[derive(Debug, Clone)]
pub enum OptimizerState {
    Sgd(SgdState),
    Sav(SavState),
    Vav(VavState),
}

/// `sqrt(f(x0) + c)`, the initial auxiliary value.
pub(crate) fn initial_r<O: Objective + ?Sized>(
    obj: &O,
    x0: &ParamVector,
    c: f64,
    batch: Option<&Batch>,
) -> Result<f64> {
    let f0 = evaluate_loss(obj, x0, batch).map_err(|e| match e {
        Error::Diverged(d) => Error::config(format!("initial point is not admissible: {d}")),
        other => other,
    })?;
    let fc = f0 + c;
    if fc <= 0.0 {
        return Err(Error::config(format!("f(x0) + c = {fc} must be positive; raise c")));
    }
    Ok(fc.sqrt())
}

/// Builds an optimizer at `x0`. Auxiliary variables start at
/// `sqrt(f(x0) + c)`, using `batch0` for mini-batch objectives.
pub fn init_state<O: Objective + ?Sized>(
    obj: &O,
    x0: ParamVector,
    hyper: Hyper,
    variant: Variant,
    batch0: Option<&Batch>,
) -> Result<OptimizerState> {
    Ok(match variant {
        Variant::Sgd => OptimizerState::Sgd(SgdState::new(x0, hyper)?),
        Variant::Sav => OptimizerState::Sav(SavState::init(obj, x0, hyper, batch0)?),
        Variant::Vav => OptimizerState::Vav(VavState::init(obj, x0, hyper, batch0)?),
    })
}

impl OptimizerState {
    pub fn x(&self) -> &ParamVector {
        match self {
            OptimizerState::Sgd(s) => &s.x,
            OptimizerState::Sav(s) => &s.x,
            OptimizerState::Vav(s) => &s.x,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        match self {
            OptimizerState::Sgd(s) => s.step,
            OptimizerState::Sav(s) => s.step,
            OptimizerState::Vav(s) => s.step,
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            OptimizerState::Sgd(_) => Variant::Sgd,
            OptimizerState::Sav(_) => Variant::Sav,
            OptimizerState::Vav(_) => Variant::Vav,
        }
    }

    /// One iteration. `batch_next` is only used by VAV's relaxation.
    /// On error the state is left unchanged.
    pub fn step<O: Objective + ?Sized>(
        &mut self,
        obj: &O,
        batch_t: Option<&Batch>,
        batch_next: Option<&Batch>,
    ) -> Result<StepOutcome> {
        match self {
            OptimizerState::Sgd(s) => s.step(obj, batch_t),
            OptimizerState::Sav(s) => s.step(obj, batch_t),
            OptimizerState::Vav(s) => s.step(obj, batch_t, batch_next),
        }
    }
}
