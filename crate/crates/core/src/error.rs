use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid order parameters j={j}, k={k}: need 1 <= j <= k and k >= 2")]
    InvalidOrder { j: usize, k: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {value:?} lies outside the space ({space})")]
    OutsideDomain {
        value: Vec<f64>,
        space: &'static str,
    },

    #[error("invalid distance table: {0}")]
    InvalidDistances(String),

    #[error("row {row} has tied distances to points {a} and {b}")]
    Tie { row: usize, a: usize, b: usize },

    #[error("invalid rank matrix: {0}")]
    InvalidRankMatrix(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("matrix is not row-stochastic: {0}")]
    NotStochastic(String),

    #[error(
        "stationary solve did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("enumeration budget exceeded: {n}^{k} tuples > {budget}")]
    BudgetExceeded { n: usize, k: usize, budget: u64 },

    #[error("not a fixed point: residual {residual:e} > {tol:e}")]
    NotFixedPoint { residual: f64, tol: f64 },

    #[error("initial distribution {spec} is not compatible with space {space}")]
    Incompatible { spec: String, space: String },

    #[error("geometric fit rejected: r^2 = {r_squared:.4} < {min:.2}")]
    PoorFit { r_squared: f64, min: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("run directory {0} is locked by a live process")]
    Locked(PathBuf),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error came from bad input rather than from the runtime.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. }
                | Error::Locked(_)
                | Error::NoConvergence { .. }
                | Error::PoorFit { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_order(j: usize, k: usize) -> Result<()> {
    if k < 2 || j < 1 || j > k {
        return Err(Error::InvalidOrder { j, k });
    }
    Ok(())
}
