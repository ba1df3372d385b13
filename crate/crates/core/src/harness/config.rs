use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::Checker;
use crate::error::{Error, Result};
use crate::objective::{Batch, Objective};
use crate::optim::{Hyper, Variant};
use crate::params::ParamVector;
use crate::problems::{make_sine_regression, MlpModel, QuadraticProblem, RegressionProblem, Rosenbrock};

/// Version of the config, summary and metrics formats.
pub const SCHEMA_VERSION: u32 = 1;

/// One run, as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub problem: ProblemConfig,
    pub optimizer: OptimizerConfig,
    pub iterations: u64,
    /// Mini-batch size for dataset problems; `None` means full batch.
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_record_every")]
    pub record_every: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub checkers: Vec<Checker>,
    /// Final full loss below this counts as converged.
    #[serde(default = "default_threshold")]
    pub converge_threshold: f64,
}

fn default_record_every() -> u64 {
    1
}

fn default_threshold() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    Rosenbrock {
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "hundred")]
        b: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "rosenbrock_start")]
        x0: Vec<f64>,
    },
    Quadratic {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        offset: f64,
        x0: Vec<f64>,
    },
    SineRegression {
        #[serde(default = "default_points")]
        num_points: usize,
        #[serde(default = "default_noise")]
        noise_sd: f64,
        /// Dataset seed; defaults to the run seed.
        #[serde(default)]
        data_seed: Option<u64>,
        #[serde(default = "default_hidden")]
        hidden: Vec<usize>,
        /// Optional `x,y` CSV replacing the generated dataset.
        #[serde(default)]
        data_csv: Option<PathBuf>,
    },
}

fn one() -> f64 {
    1.0
}
fn hundred() -> f64 {
    100.0
}
fn rosenbrock_start() -> Vec<f64> {
    vec![-2.0, -2.0]
}
fn default_points() -> usize {
    512
}
fn default_noise() -> f64 {
    0.05
}
fn default_hidden() -> Vec<usize> {
    vec![16, 16]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: Variant,
    pub eta: f64,
    #[serde(default = "default_psi")]
    pub psi: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub scheduler: bool,
}

fn default_psi() -> f64 {
    0.95
}

impl OptimizerConfig {
    pub fn new(kind: Variant, eta: f64) -> Self {
        Self { kind, eta, psi: default_psi(), c: 0.0, scheduler: false }
    }

    pub fn hyper(&self) -> Hyper {
        Hyper { eta: self.eta, psi: self.psi, c: self.c, scheduler: self.scheduler }
    }
}

/// A constructed benchmark objective.
#[derive(Debug, Clone)]
pub enum Problem {
    Rosenbrock(Rosenbrock),
    Quadratic(QuadraticProblem),
    Regression(RegressionProblem),
}

impl Objective for Problem {
    fn name(&self) -> &str {
        self.inner().name()
    }
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn dataset_size(&self) -> usize {
        self.inner().dataset_size()
    }
    fn value(&self, x: &[f64], batch: Option<&Batch>) -> f64 {
        self.inner().value(x, batch)
    }
    fn value_grad(&self, x: &[f64], batch: Option<&Batch>) -> (f64, Vec<f64>) {
        self.inner().value_grad(x, batch)
    }
}

impl Problem {
    fn inner(&self) -> &dyn Objective {
        match self {
            Problem::Rosenbrock(p) => p,
            Problem::Quadratic(p) => p,
            Problem::Regression(p) => p,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            let kind = match self.problem {
                ProblemConfig::Rosenbrock { .. } => "rosenbrock",
                ProblemConfig::Quadratic { .. } => "quadratic",
                ProblemConfig::SineRegression { .. } => "sine_regression",
            };
            format!("{kind}-{:?}-{}", self.optimizer.kind, self.optimizer.eta).to_lowercase()
        })
    }

    /// Everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.optimizer.hyper().validate()?;
        if self.record_every == 0 {
            return Err(Error::config("record_every must be >= 1"));
        }
        if !(self.converge_threshold > 0.0) {
            return Err(Error::config("converge_threshold must be positive"));
        }
        match &self.problem {
            ProblemConfig::Rosenbrock { a, b, scale, x0 } => {
                if x0.len() != 2 {
                    return Err(Error::config("rosenbrock x0 must have 2 entries"));
                }
                if ![*a, *b, *scale].iter().all(|v| v.is_finite()) || *scale <= 0.0 || *b < 0.0 {
                    return Err(Error::config("rosenbrock needs finite a, b >= 0 and scale > 0"));
                }
            }
            ProblemConfig::Quadratic { matrix, x0, .. } => {
                if x0.len() != matrix.len() {
                    return Err(Error::config("quadratic x0 does not match the matrix size"));
                }
            }
            ProblemConfig::SineRegression { num_points, hidden, data_csv, .. } => {
                if data_csv.is_none() && *num_points < 2 {
                    return Err(Error::config("sine_regression needs num_points >= 2"));
                }
                if hidden.contains(&0) {
                    return Err(Error::config("hidden widths must be positive"));
                }
                if let Some(bs) = self.batch_size {
                    if bs == 0 || (data_csv.is_none() && bs > *num_points) {
                        return Err(Error::config(format!("batch_size {bs} must lie in 1..={num_points}")));
                    }
                }
            }
        }
        if self.batch_size.is_some() && !matches!(self.problem, ProblemConfig::SineRegression { .. }) {
            return Err(Error::config("batch_size only applies to dataset problems"));
        }
        Ok(())
    }

    /// Objective and starting point.
    pub fn build(&self) -> Result<(Problem, ParamVector)> {
        self.validate()?;
        match &self.problem {
            ProblemConfig::Rosenbrock { a, b, scale, x0 } => Ok((
                Problem::Rosenbrock(Rosenbrock { a: *a, b: *b, scale: *scale }),
                ParamVector::new(x0.clone())?,
            )),
            ProblemConfig::Quadratic { matrix, offset, x0 } => Ok((
                Problem::Quadratic(QuadraticProblem::new(matrix.clone(), *offset)?),
                ParamVector::new(x0.clone())?,
            )),
            ProblemConfig::SineRegression { num_points, noise_sd, data_seed, hidden, data_csv } => {
                let mut widths = vec![1];
                widths.extend(hidden);
                widths.push(1);
                let model = MlpModel::new(widths)?;
                let problem = match data_csv {
                    Some(path) => RegressionProblem::read_csv(path, model)?,
                    None => {
                        let base = make_sine_regression(*num_points, *noise_sd, data_seed.unwrap_or(self.seed))?;
                        RegressionProblem::new(base.inputs().to_vec(), base.targets().to_vec(), model)?
                    }
                };
                if let Some(bs) = self.batch_size {
                    if bs > problem.dataset_size() {
                        return Err(Error::config(format!(
                            "batch_size {bs} exceeds dataset size {}",
                            problem.dataset_size()
                        )));
                    }
                }
                let x0 = ParamVector::new(problem.init_params(self.seed))?;
                Ok((Problem::Regression(problem), x0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"schema_version": 1,
                "problem": {"kind": "rosenbrock"},
                "optimizer": {"kind": "vav", "eta": 0.04},
                "iterations": 10}"#,
        )
        .unwrap();
        assert_eq!(cfg.optimizer.psi, 0.95);
        assert_eq!(cfg.optimizer.c, 0.0);
        assert_eq!(cfg.record_every, 1);
        assert_eq!(cfg.converge_threshold, 1e-3);
        let (p, x0) = cfg.build().unwrap();
        assert_eq!(x0.as_slice(), &[-2.0, -2.0]);
        assert_eq!(p.value(&x0, None), 3609.0);
    }

    #[test]
    fn config_errors() {
        let base = r#"{"schema_version": 1, "problem": {"kind": "rosenbrock"},
                       "optimizer": {"kind": "vav", "eta": ETA, "psi": PSI}, "iterations": 10}"#;
        let cfg = |eta: &str, psi: &str| ExperimentConfig::from_json(&base.replace("ETA", eta).replace("PSI", psi));
        assert!(cfg("0.1", "0.95").is_ok());
        assert!(matches!(cfg("0", "0.95"), Err(Error::Config(_))));
        assert!(matches!(cfg("0.1", "1.0"), Err(Error::Config(_))));
        assert!(ExperimentConfig::from_json(r#"{"schema_version": 2}"#).is_err());
        let unknown = base.replace("ETA", "0.1").replace("PSI", "0.9").replace("\"iterations\"", "\"iters\"");
        assert!(ExperimentConfig::from_json(&unknown).is_err());
        let bad_checker = r#"{"schema_version": 1, "problem": {"kind": "rosenbrock"},
            "optimizer": {"kind": "sgd", "eta": 0.1}, "iterations": 1, "checkers": ["nope"]}"#;
        assert!(ExperimentConfig::from_json(bad_checker).is_err());
        let bad_batch = r#"{"schema_version": 1, "problem": {"kind": "sine_regression", "num_points": 10},
            "optimizer": {"kind": "sgd", "eta": 0.1}, "iterations": 1, "batch_size": 11}"#;
        assert!(ExperimentConfig::from_json(bad_batch).is_err());
    }

    #[test]
    fn sine_problem_is_seeded() {
        let text = r#"{"schema_version": 1, "problem": {"kind": "sine_regression", "num_points": 64},
            "optimizer": {"kind": "vav", "eta": 0.5}, "iterations": 1, "batch_size": 16, "seed": 3}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let (p1, x1) = cfg.build().unwrap();
        let (p2, x2) = cfg.build().unwrap();
        assert_eq!(x1, x2);
        assert_eq!(p1.value(&x1, None), p2.value(&x2, None));
        assert_eq!(p1.dim(), 321);
        assert_eq!(p1.dataset_size(), 64);
    }
}
