use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A non-finite loss, gradient or iterate.
///
/// Divergence is an outcome, not a crash: the harness turns it into a
/// `diverged` run status.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    /// Step at which the non-finite value appeared, when known.
    pub step: Option<u64>,
    /// What went non-finite (`loss`, `gradient`, `iterate`, ...).
    pub quantity: &'static str,
}

impl Divergence {
    pub fn new(quantity: &'static str) -> Self {
        Self { step: None, quantity }
    }

    pub fn at_step(mut self, step: u64) -> Self {
        self.step.get_or_insert(step);
        self
    }
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.step {
            Some(step) => write!(f, "non-finite {} at step {}", self.quantity, step),
            None => write!(f, "non-finite {}", self.quantity),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("diverged: {0}")]
    Diverged(Divergence),

    #[error("f + c = {value} is not positive; raise the offset c")]
    Domain { value: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("gradient oracle failed at coordinate {coordinate}: probe value {value}")]
    Oracle { coordinate: usize, value: f64 },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Attach a step index to a divergence; other errors pass through.
    pub fn at_step(self, step: u64) -> Self {
        match self {
            Error::Diverged(d) => Error::Diverged(d.at_step(step)),
            other => other,
        }
    }

    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Diverged(_))
    }
}

impl From<Divergence> for Error {
    fn from(d: Divergence) -> Self {
        Error::Diverged(d)
    }
}
