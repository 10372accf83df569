use thiserror::Error;

use crate::solver::FitResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("penalty weight {value} at coordinate {index} is negative or not finite")]
    InvalidWeight { index: usize, value: f64 },

    #[error("solver did not converge within {max_iter} iterations (kkt residual {kkt_residual:e})")]
    NonConvergence {
        max_iter: usize,
        kkt_residual: f64,
        best: Box<FitResult>,
    },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("weighted Gram matrix is numerically singular (condition estimate {condition:e})")]
    SingularHessian { condition: f64 },

    #[error("all residuals are zero: the fit interpolates the data")]
    AllZeroResiduals,

    #[error("root bracket [{lo}, {hi}] does not straddle the expectile")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("IRW step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("missing column: {0}")]
    MissingColumn(String),

    #[error("non-numeric cell at row {row}, column {col}")]
    NonNumericCell { row: usize, col: usize },

    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the solver rather than by the caller's input.
    pub fn is_convergence_failure(&self) -> bool {
        match self {
            Error::NonConvergence { .. } => true,
            Error::Step { source, .. } => source.is_convergence_failure(),
            _ => false,
        }
    }

    /// Best iterate carried by a convergence failure, if any.
    pub fn best_iterate(&self) -> Option<&FitResult> {
        match self {
            Error::NonConvergence { best, .. } => Some(best),
            Error::Step { source, .. } => source.best_iterate(),
            _ => None,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
