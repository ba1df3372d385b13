//! Relaxation weight for the auxiliary variable.
//!
//! For one coordinate, `r' = w * r_tilde + (1 - w) * sqrt(F)` and `w` is the
//! smallest value in `[0, 1]` with `r'^2 - r_tilde^2 <= (psi / eta) dx^2`.
//! Expanding `r'` turns the constraint into `Q(w) = a w^2 + b w + c <= 0`:
//!
//! ```text
//! a = (sqrt(F) - r_tilde)^2
//! b = 2 sqrt(F) (r_tilde - sqrt(F))
//! c = F - r_tilde^2 - (psi / eta) dx^2
//! ```
//!
//! `Q(1) = -(psi / eta) dx^2 <= 0`, so the discriminant is nonnegative and
//! the answer is the smaller root clamped into `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs of one relaxation solve. `f_next` already includes the offset `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaInputs {
    pub f_next: f64,
    pub r_tilde: f64,
    pub dx: f64,
    pub psi: f64,
    pub eta: f64,
}

/// `Q(w) = a w^2 + b w + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Quadratic {
    pub fn eval(&self, w: f64) -> f64 {
        (self.a * w + self.b) * w + self.c
    }

    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    /// Rounding scale of the discriminant.
    pub fn discriminant_scale(&self) -> f64 {
        (self.b * self.b).max((4.0 * self.a * self.c).abs()).max(1.0)
    }
}

/// Relative threshold under which `a` counts as zero.
pub const A_ZERO_THRESHOLD: f64 = 1e-14;
/// Tolerated negative discriminant, relative to [`Quadratic::discriminant_scale`].
pub const DISCRIMINANT_TOLERANCE: f64 = 1e-9;

impl OmegaInputs {
    pub fn validate(&self) -> Result<()> {
        let fields = [self.f_next, self.r_tilde, self.dx, self.psi, self.eta];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract(format!("non-finite relaxation inputs {self:?}")));
        }
        if self.f_next <= 0.0 {
            return Err(Error::Domain { value: self.f_next });
        }
        if self.eta <= 0.0 {
            return Err(Error::Contract(format!("relaxation needs eta > 0, got {}", self.eta)));
        }
        if !(self.psi > 0.0 && self.psi < 1.0) {
            return Err(Error::Contract(format!("psi must lie in (0, 1), got {}", self.psi)));
        }
        Ok(())
    }

    /// Allowed growth of `r^2` over `r_tilde^2`: `(psi / eta) dx^2`.
    pub fn slack(&self) -> f64 {
        self.psi / self.eta * self.dx * self.dx
    }

    pub fn quadratic(&self) -> Quadratic {
        let s = self.f_next.sqrt();
        let gap = s - self.r_tilde;
        Quadratic {
            a: gap * gap,
            b: 2.0 * s * (self.r_tilde - s),
            c: self.f_next - self.r_tilde * self.r_tilde - self.slack(),
        }
    }

    /// Whether `a` is treated as zero (then `w = 0`).
    pub fn is_degenerate(&self) -> bool {
        self.quadratic().a < A_ZERO_THRESHOLD * self.f_next.max(1.0)
    }
}

/// Smallest feasible relaxation weight in `[0, 1]`.
pub fn solve_omega(inputs: &OmegaInputs) -> Result<f64> {
    inputs.validate()?;
    let q = inputs.quadratic();
    if q.a < A_ZERO_THRESHOLD * inputs.f_next.max(1.0) {
        return Ok(0.0);
    }
    let disc = q.discriminant();
    if disc < -DISCRIMINANT_TOLERANCE * q.discriminant_scale() {
        return Err(Error::Invariant(format!(
            "negative discriminant {disc:e} for relaxation inputs {inputs:?}"
        )));
    }
    // Cancellation-free form of (-b - sqrt(disc)) / 2a: the two roots are
    // t / a and c / t. b is nonzero here because a is.
    let t = -0.5 * (q.b + disc.max(0.0).sqrt().copysign(q.b));
    let smaller = (t / q.a).min(q.c / t);
    Ok(smaller.clamp(0.0, 1.0))
}
