//! The value/gradient contract every benchmark problem satisfies.

use std::collections::HashSet;

use crate::error::{Divergence, Error, Result};
use crate::params::ParamVector;

/// Row indices of one mini-batch. Indices are in bounds and distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    indices: Vec<usize>,
}

impl Batch {
    pub fn new(indices: Vec<usize>, dataset_size: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::config("batch must be non-empty"));
        }
        let mut seen = HashSet::with_capacity(indices.len());
        for &i in &indices {
            if i >= dataset_size {
                return Err(Error::config(format!(
                    "batch index {i} out of bounds for dataset of size {dataset_size}"
                )));
            }
            if !seen.insert(i) {
                return Err(Error::config(format!("duplicate batch index {i}")));
            }
        }
        Ok(Self { indices })
    }

    /// Every row, in order.
    pub fn full(dataset_size: usize) -> Self {
        Self { indices: (0..dataset_size).collect() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    fn fits(&self, dataset_size: usize) -> bool {
        self.indices.iter().all(|&i| i < dataset_size)
    }
}

/// A differentiable objective, optionally defined over a dataset.
///
/// `dataset_size() == 0` marks a deterministic objective that ignores
/// batches. With `batch = None` a dataset objective evaluates the full
/// dataset. Implementations are immutable after construction.
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn dataset_size(&self) -> usize {
        0
    }

    fn value(&self, x: &[f64], batch: Option<&Batch>) -> f64;

    /// Loss and gradient on the same batch in one pass.
    fn value_grad(&self, x: &[f64], batch: Option<&Batch>) -> (f64, Vec<f64>);

    fn gradient(&self, x: &[f64], batch: Option<&Batch>) -> Vec<f64> {
        self.value_grad(x, batch).1
    }
}

/// Loss and gradient at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub grad: ParamVector,
}

fn check_query<O: Objective + ?Sized>(obj: &O, x: &ParamVector, batch: Option<&Batch>) -> Result<()> {
    if x.dim() != obj.dim() {
        return Err(Error::Contract(format!(
            "{} expects {} parameters, got {}",
            obj.name(),
            obj.dim(),
            x.dim()
        )));
    }
    if let Some(b) = batch {
        if obj.dataset_size() > 0 && !b.fits(obj.dataset_size()) {
            return Err(Error::Contract(format!("batch does not fit {}", obj.name())));
        }
    }
    Ok(())
}

/// Paired value/gradient query. A non-finite loss or gradient is reported
/// as [`Error::Diverged`].
pub fn evaluate<O: Objective + ?Sized>(
    obj: &O,
    x: &ParamVector,
    batch: Option<&Batch>,
) -> Result<Evaluation> {
    check_query(obj, x, batch)?;
    let (loss, grad) = obj.value_grad(x, batch);
    if !loss.is_finite() {
        return Err(Divergence::new("loss").into());
    }
    let grad = ParamVector::from_update(grad).map_err(|_| Divergence::new("gradient"))?;
    Ok(Evaluation { loss, grad })
}

/// Loss only, with the same divergence reporting as [`evaluate`].
pub fn evaluate_loss<O: Objective + ?Sized>(
    obj: &O,
    x: &ParamVector,
    batch: Option<&Batch>,
) -> Result<f64> {
    check_query(obj, x, batch)?;
    let loss = obj.value(x, batch);
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(Divergence::new("loss").into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{QuadraticProblem, Rosenbrock};

    #[test]
    fn batch_validation() {
        assert!(Batch::new(vec![0, 1, 2], 3).is_ok());
        assert!(Batch::new(vec![0, 3], 3).is_err());
        assert!(Batch::new(vec![1, 1], 3).is_err());
        assert!(Batch::new(vec![], 3).is_err());
        assert_eq!(Batch::full(4).indices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn rosenbrock_minimum() {
        let x = ParamVector::new(vec![1.0, 1.0]).unwrap();
        let e = evaluate(&Rosenbrock::default(), &x, None).unwrap();
        assert_eq!(e.loss, 0.0);
        assert_eq!(e.grad.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn rosenbrock_start_point() {
        // f = 3^2 + 100 * 6^2; df/dx = -2*3 - 400*(-2)*(-6); df/dy = 200*(-6)
        let x = ParamVector::new(vec![-2.0, -2.0]).unwrap();
        let e = evaluate(&Rosenbrock::default(), &x, None).unwrap();
        assert_eq!(e.loss, 3609.0);
        assert_eq!(e.grad.as_slice(), &[-4806.0, -1200.0]);
    }

    #[test]
    fn half_norm_squared() {
        let q = QuadraticProblem::identity(2);
        let x = ParamVector::new(vec![3.0, 4.0]).unwrap();
        let e = evaluate(&q, &x, None).unwrap();
        assert_eq!(e.loss, 12.5);
        assert_eq!(e.grad.as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn non_finite_is_divergence() {
        let x = ParamVector::new(vec![1e200, 1e200]).unwrap();
        let err = evaluate(&Rosenbrock::default(), &x, None).unwrap_err();
        assert!(err.is_divergence(), "{err}");
    }

    #[test]
    fn dimension_mismatch_is_contract_error() {
        let x = ParamVector::new(vec![1.0, 1.0, 1.0]).unwrap();
        let err = evaluate(&Rosenbrock::default(), &x, None).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }
}
