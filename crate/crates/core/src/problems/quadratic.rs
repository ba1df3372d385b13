use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{Batch, Objective};

/// `f(x) = 0.5 x^T M x + offset` with `M` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuadraticSpec")]
pub struct QuadraticProblem {
    matrix: Vec<Vec<f64>>,
    offset: f64,
}

#[derive(Deserialize)]
struct QuadraticSpec {
    matrix: Vec<Vec<f64>>,
    #[serde(default)]
    offset: f64,
}

impl TryFrom<QuadraticSpec> for QuadraticProblem {
    type Error = Error;

    fn try_from(spec: QuadraticSpec) -> Result<Self> {
        Self::new(spec.matrix, spec.offset)
    }
}

impl QuadraticProblem {
    pub fn new(matrix: Vec<Vec<f64>>, offset: f64) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::config("quadratic matrix must be square and non-empty"));
        }
        if !(offset >= 0.0 && offset.is_finite()) {
            return Err(Error::config(format!("quadratic offset must be >= 0, got {offset}")));
        }
        for i in 0..n {
            for j in 0..n {
                let (u, v) = (matrix[i][j], matrix[j][i]);
                if !u.is_finite() {
                    return Err(Error::config("quadratic matrix has non-finite entries"));
                }
                if (u - v).abs() > 1e-12 * u.abs().max(v.abs()).max(1.0) {
                    return Err(Error::config("quadratic matrix must be symmetric"));
                }
            }
        }
        if !is_psd(&matrix) {
            return Err(Error::config("quadratic matrix must be positive semidefinite"));
        }
        Ok(Self { matrix, offset })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n], 0.0).expect("identity is PSD")
    }

    pub fn diagonal(diag: &[f64], offset: f64) -> Result<Self> {
        let n = diag.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
            .collect();
        Self::new(matrix, offset)
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.iter().map(|row| row.iter().zip(x).map(|(m, v)| m * v).sum()).collect()
    }
}

// Cholesky of M + delta I with delta tied to the trace.
fn is_psd(m: &[Vec<f64>]) -> bool {
    let n = m.len();
    let trace: f64 = (0..n).map(|i| m[i][i].abs()).sum();
    let delta = 1e-12 * trace.max(1.0);
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j] + if i == j { delta } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    true
}

impl Objective for QuadraticProblem {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.matrix.len()
    }

    fn value(&self, x: &[f64], _batch: Option<&Batch>) -> f64 {
        self.value_grad(x, None).0
    }

    fn value_grad(&self, x: &[f64], _batch: Option<&Batch>) -> (f64, Vec<f64>) {
        let mx = self.mat_vec(x);
        let quad: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
        (0.5 * quad + self.offset, mx)
    }
}
