//! Python bindings: problems, optimizers, the relaxation solver and the
//! experiment runner.

use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use vav_core::harness::{self, ExperimentConfig};
use vav_core::optim::{self, Hyper, OmegaInputs, OptimizerState, Variant};
use vav_core::problems::{make_sine_regression, MlpModel, QuadraticProblem, RegressionProblem, Rosenbrock};
use vav_core::{gradcheck, Batch, Error, Objective, ParamVector};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Domain { .. } | Error::Contract(_) | Error::Format { .. } => {
            PyValueError::new_err(e.to_string())
        }
        Error::Diverged(_) => PyArithmeticError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn batch_of(problem: &harness::Problem, indices: Option<Vec<usize>>) -> PyResult<Option<Batch>> {
    indices.map(|idx| Batch::new(idx, problem.dataset_size()).map_err(to_py)).transpose()
}

/// A benchmark objective.
#[pyclass(name = "Problem", module = "vav", frozen, from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: harness::Problem,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    #[pyo3(signature = (a=1.0, b=100.0, scale=1.0))]
    fn rosenbrock(a: f64, b: f64, scale: f64) -> Self {
        Self { inner: harness::Problem::Rosenbrock(Rosenbrock { a, b, scale }) }
    }

    #[staticmethod]
    #[pyo3(signature = (matrix, offset=0.0))]
    fn quadratic(matrix: Vec<Vec<f64>>, offset: f64) -> PyResult<Self> {
        let q = QuadraticProblem::new(matrix, offset).map_err(to_py)?;
        Ok(Self { inner: harness::Problem::Quadratic(q) })
    }

    #[staticmethod]
    #[pyo3(signature = (num_points=512, noise_sd=0.05, seed=0, hidden=vec![16, 16]))]
    fn sine_regression(num_points: usize, noise_sd: f64, seed: u64, hidden: Vec<usize>) -> PyResult<Self> {
        let base = make_sine_regression(num_points, noise_sd, seed).map_err(to_py)?;
        let mut widths = vec![1];
        widths.extend(hidden);
        widths.push(1);
        let model = MlpModel::new(widths).map_err(to_py)?;
        let p = RegressionProblem::new(base.inputs().to_vec(), base.targets().to_vec(), model).map_err(to_py)?;
        Ok(Self { inner: harness::Problem::Regression(p) })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_owned()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn dataset_size(&self) -> usize {
        self.inner.dataset_size()
    }

    #[pyo3(signature = (x, batch=None))]
    fn value(&self, x: Vec<f64>, batch: Option<Vec<usize>>) -> PyResult<f64> {
        let b = batch_of(&self.inner, batch)?;
        let x = ParamVector::new(x).map_err(to_py)?;
        vav_core::objective::evaluate_loss(&self.inner, &x, b.as_ref()).map_err(to_py)
    }

    #[pyo3(signature = (x, batch=None))]
    fn value_grad(&self, x: Vec<f64>, batch: Option<Vec<usize>>) -> PyResult<(f64, Vec<f64>)> {
        let b = batch_of(&self.inner, batch)?;
        let x = ParamVector::new(x).map_err(to_py)?;
        let e = vav_core::evaluate(&self.inner, &x, b.as_ref()).map_err(to_py)?;
        Ok((e.loss, e.grad.into_inner()))
    }

    /// Seeded initial parameters for regression problems.
    fn init_params(&self, seed: u64) -> PyResult<Vec<f64>> {
        match &self.inner {
            harness::Problem::Regression(p) => Ok(p.init_params(seed)),
            _ => Err(PyValueError::new_err("init_params only applies to regression problems")),
        }
    }

    #[pyo3(signature = (x, batch=None, h=1e-6))]
    fn finite_difference_gradient(&self, x: Vec<f64>, batch: Option<Vec<usize>>, h: f64) -> PyResult<Vec<f64>> {
        let b = batch_of(&self.inner, batch)?;
        gradcheck::finite_difference_gradient(&self.inner, &x, b.as_ref(), h).map_err(to_py)
    }
}

/// SGD, SAV or VAV state bound to one problem.
#[pyclass(name = "Optimizer", module = "vav")]
struct PyOptimizer {
    problem: PyProblem,
    state: OptimizerState,
}

fn parse_variant(kind: &str) -> PyResult<Variant> {
    match kind {
        "sgd" => Ok(Variant::Sgd),
        "sav" => Ok(Variant::Sav),
        "vav" => Ok(Variant::Vav),
        other => Err(PyValueError::new_err(format!("unknown optimizer `{other}`"))),
    }
}

#[pymethods]
impl PyOptimizer {
    #[new]
    #[pyo3(signature = (problem, x0, kind="vav", eta=0.01, psi=0.95, c=0.0, scheduler=false, batch=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        problem: PyProblem,
        x0: Vec<f64>,
        kind: &str,
        eta: f64,
        psi: f64,
        c: f64,
        scheduler: bool,
        batch: Option<Vec<usize>>,
    ) -> PyResult<Self> {
        let hyper = Hyper { eta, psi, c, scheduler };
        let x0 = ParamVector::new(x0).map_err(to_py)?;
        let b = batch_of(&problem.inner, batch)?;
        let state = optim::init_state(&problem.inner, x0, hyper, parse_variant(kind)?, b.as_ref()).map_err(to_py)?;
        Ok(Self { problem, state })
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.state.x().to_vec()
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.state.steps_taken()
    }

    /// Auxiliary values: one per coordinate for VAV, one scalar for SAV.
    #[getter]
    fn r(&self) -> Option<Vec<f64>> {
        match &self.state {
            OptimizerState::Vav(s) => Some(s.r.clone()),
            OptimizerState::Sav(s) => Some(vec![s.r]),
            OptimizerState::Sgd(_) => None,
        }
    }

    /// One iteration; returns the step record as a dict.
    #[pyo3(signature = (batch=None, next_batch=None))]
    fn step<'py>(
        &mut self,
        py: Python<'py>,
        batch: Option<Vec<usize>>,
        next_batch: Option<Vec<usize>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let b = batch_of(&self.problem.inner, batch)?;
        let nb = batch_of(&self.problem.inner, next_batch)?;
        let out = self.state.step(&self.problem.inner, b.as_ref(), nb.as_ref()).map_err(to_py)?;
        let text = serde_json::to_string(&out.record).map_err(|e| to_py(e.into()))?;
        json_to_py(py, &text)
    }
}

/// Smallest relaxation weight in [0, 1]; `f_next` includes the offset.
#[pyfunction]
fn solve_omega(f_next: f64, r_tilde: f64, dx: f64, psi: f64, eta: f64) -> PyResult<f64> {
    optim::solve_omega(&OmegaInputs { f_next, r_tilde, dx, psi, eta }).map_err(to_py)
}

#[pyfunction]
fn scheduler_effective_lr(r: f64, c: f64, eta: f64) -> f64 {
    optim::scheduler_effective_lr(r, c, eta)
}

#[pyfunction]
fn vav_tilde_r(r: Vec<f64>, grad: Vec<f64>, f_batch: f64, c: f64, eta: f64) -> PyResult<Vec<f64>> {
    optim::vav_tilde_r(&r, &grad, f_batch, c, eta).map_err(to_py)
}

/// Runs a JSON config. With `out_dir`, metrics and summary files are written there.
#[pyfunction]
#[pyo3(signature = (config_json, out_dir=None))]
fn run_experiment<'py>(py: Python<'py>, config_json: &str, out_dir: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(to_py)?;
    let summary = py
        .detach(|| match out_dir {
            Some(dir) => harness::run_experiment(&cfg, &dir),
            None => harness::run_in_memory(&cfg).map(|(s, _)| s),
        })
        .map_err(to_py)?;
    let text = serde_json::to_string(&summary).map_err(|e| to_py(e.into()))?;
    json_to_py(py, &text)
}

#[pymodule]
fn vav(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyOptimizer>()?;
    m.add_function(wrap_pyfunction!(solve_omega, m)?)?;
    m.add_function(wrap_pyfunction!(scheduler_effective_lr, m)?)?;
    m.add_function(wrap_pyfunction!(vav_tilde_r, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
