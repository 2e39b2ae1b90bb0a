use std::path::PathBuf;

use crate::pressure::EllipticSolveReport;

/// Errors produced by the solver stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: ({n_a}, L={period_a}) vs ({n_b}, L={period_b})")]
    GridMismatch {
        n_a: usize,
        period_a: f64,
        n_b: usize,
        period_b: f64,
    },

    #[error("rank mismatch: {0}")]
    RankMismatch(String),

    #[error("Poisson problem not solvable: input mean {mean:e} is not zero")]
    Solvability { mean: f64 },

    #[error("flow map geometry degenerate: min det = {min_det:.6} at grid point {location:?}")]
    GeometryDegenerate {
        min_det: f64,
        location: (usize, usize),
    },

    #[error("flow map inversion failed: worst residual {worst_residual:e} after {iterations} Newton iterations")]
    Inversion {
        worst_residual: f64,
        iterations: usize,
    },

    #[error("elliptic fixed point diverged: {0:?}")]
    EllipticDivergence(EllipticSolveReport),

    #[error("elliptic fixed point did not converge: {0:?}")]
    EllipticNonConvergence(EllipticSolveReport),

    #[error("time step {dt:e} exceeds stability bound {bound:e}")]
    Stability { dt: f64, bound: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("amplitude too large: constraint iteration stalled with contraction ratio {ratio:.4}")]
    Amplitude { ratio: f64 },

    #[error("nonpositive samples in fit window at t = {offenders:?}")]
    Domain { offenders: Vec<f64> },

    #[error("insufficient samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wrap with a description of what was running.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
