use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("group coordinates left the chart: |a| = {norm:.6} exceeds radius {radius:.6}")]
    ChartExit { norm: f64, radius: f64 },

    #[error("singular matrix ({context})")]
    SingularMatrix { context: String },

    #[error("gauge is not transversal to the orbit here (Faddeev-Popov matrix singular)")]
    SingularFaddeevPopov,

    #[error("orbit metric d is singular")]
    SingularOrbitMetric,

    #[error("metric is not positive definite ({context})")]
    SingularMetric { context: String },

    #[error("initial-data linear system is singular")]
    SingularLinearSystem,

    #[error("equilibrium Jacobian is singular")]
    SingularJacobian,

    #[error("group action is not free here: orbit rank {rank} < group dimension {dim}")]
    DegenerateOrbit { rank: usize, dim: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error in {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("expression error: {0}")]
    Expression(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Expression(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
