//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by model fitting, residual computation, and the
/// numerical layer.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input vectors are inconsistent; `index` names the offending entry
    /// where one exists.
    #[error("data error at index {index}: {message}")]
    Data { index: usize, message: String },

    /// The design matrix does not have full column rank.
    #[error("design matrix is rank deficient (rank {rank} of {cols} columns)")]
    RankDeficient { rank: usize, cols: usize },

    /// Logistic fitting diverged in a way consistent with perfectly
    /// separated classes.
    #[error("perfect separation suspected: |coef|_inf = {max_abs_coef:.2} after {iterations} iterations")]
    Separation {
        max_abs_coef: f64,
        iterations: usize,
    },

    /// An iterative fit exhausted its iteration budget.
    #[error("{context}: no convergence after {iterations} iterations (last change {last_change:.3e})")]
    NoConvergence {
        context: String,
        iterations: usize,
        last_change: f64,
    },

    /// A series evaluation hit its term cap before the tail became
    /// negligible. Carries the evaluation state for diagnosis.
    #[error("series for {context} did not converge: {terms} terms, partial sum {partial_sum:.6e}, last term {last_term:.3e}")]
    SeriesNonConvergence {
        context: String,
        terms: usize,
        partial_sum: f64,
        last_term: f64,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn data(index: usize, msg: impl Into<String>) -> Self {
        Error::Data {
            index,
            message: msg.into(),
        }
    }
}
