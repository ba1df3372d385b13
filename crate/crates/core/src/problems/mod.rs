//! Benchmark objectives.

mod mlp;
mod quadratic;
mod regression;
mod rosenbrock;

pub use mlp::MlpModel;
pub use quadratic::QuadraticProblem;
pub use regression::{make_sine_regression, sine_target, RegressionProblem};
pub use rosenbrock::{rosenbrock_value_grad, Rosenbrock};
