//! Command-line surface for the semicontinuous diagnostics library:
//! CSV ingestion, model fitting and persistence, residual and QQ
//! emission, out-of-sample validation, and scenario execution.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 fit non-convergence.

pub mod commands;
pub mod csv_io;
pub mod model_file;

use std::fmt;

/// Errors carrying their process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable paths, invalid configuration → exit 1.
    Usage(String),
    /// Malformed data, schema mismatches, residual-stage failures → exit 2.
    Data(String),
    /// The requested fit did not converge or was rejected → exit 3.
    Fit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Fit(_) => 3,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn data_stage(err: semidiag::Error) -> Self {
        CliError::Data(err.to_string())
    }

    pub fn fit_stage(err: semidiag::Error) -> Self {
        CliError::Fit(err.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Fit(m) => write!(f, "fit error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;
