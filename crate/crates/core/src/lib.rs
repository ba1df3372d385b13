//! Energy-dissipative optimization with a per-coordinate auxiliary variable.
//!
//! The crate provides:
//!
//! - an objective/gradient contract with mini-batch support ([`objective`]),
//!   deterministic batch sampling ([`rng`]) and a central-difference gradient
//!   oracle ([`gradcheck`]);
//! - plain SGD, the scalar auxiliary variable (SAV) scheme and the elementwise
//!   relaxed vector auxiliary variable (VAV) method ([`optim`]);
//! - invariant checkers that audit a run's step stream ([`diagnostics`]);
//! - benchmark objectives: Rosenbrock, convex quadratics and a tanh MLP on a
//!   noisy sine regression ([`problems`]);
//! - a config-driven experiment harness backing the `vav` CLI ([`harness`]).

pub mod diagnostics;
pub mod error;
pub mod gradcheck;
pub mod harness;
pub mod objective;
pub mod optim;
pub mod params;
pub mod problems;
pub mod rng;

pub use error::{Divergence, Error, Result};
pub use objective::{evaluate, Batch, Evaluation, Objective};
pub use params::ParamVector;
pub use rng::{sample_batch, RngStream};
