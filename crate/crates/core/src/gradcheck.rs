//! Central-difference gradient oracle.

use crate::error::{Error, Result};
use crate::objective::{Batch, Objective};

/// `(f(x + h e_i) - f(x - h e_i)) / 2h` for every coordinate, on one batch.
pub fn finite_difference_gradient<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    batch: Option<&Batch>,
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config(format!("finite-difference step must be positive, got {h}")));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = obj.value(&probe, batch);
        probe[i] = orig - h;
        let minus = obj.value(&probe, batch);
        probe[i] = orig;
        for v in [plus, minus] {
            if !v.is_finite() {
                return Err(Error::Oracle { coordinate: i, value: v });
            }
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// Outcome of comparing an analytic gradient with the oracle.
#[derive(Debug, Clone)]
pub struct GradientCheck {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    /// Largest `|a - n| / max(|a|, |n|)` over coordinates that are not
    /// already inside the absolute floor.
    pub max_rel_error: f64,
    pub worst_coordinate: Option<usize>,
    pub passed: bool,
}

/// Elementwise agreement test: each coordinate passes when
/// `|a - n| <= rel_tol * max(|a|, |n|)` or `|a - n| <= abs_floor`.
pub fn check_gradient<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    batch: Option<&Batch>,
    h: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<GradientCheck> {
    let analytic = obj.gradient(x, batch);
    let numeric = finite_difference_gradient(obj, x, batch, h)?;
    let mut max_rel_error = 0.0f64;
    let mut worst_coordinate = None;
    let mut passed = true;
    for (i, (&a, &n)) in analytic.iter().zip(&numeric).enumerate() {
        let diff = (a - n).abs();
        if diff <= abs_floor {
            continue;
        }
        let rel = diff / a.abs().max(n.abs());
        if !(rel <= rel_tol) {
            passed = false;
        }
        if !(rel <= max_rel_error) {
            max_rel_error = rel;
            worst_coordinate = Some(i);
        }
    }
    Ok(GradientCheck { analytic, numeric, max_rel_error, worst_coordinate, passed })
}
