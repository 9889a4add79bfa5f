// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    /// The data file does not cover the range the pipeline needs.
    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("{quantity} = {value} is outside the valid range [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mode tracking failed: {0}")]
    ModeTracking(String),

    #[error("required mode not found: {0}")]
    ModeNotFound(String),

    /// Central phase mismatch is (numerically) zero, so no poling is required.
    #[error("process is already phase matched (|Δk| = {0:e} rad/µm); QPM period is unbounded")]
    AlreadyPhaseMatched(f64),

    #[error("no symmetric separability point: (N_s - N_p)(N_p - N_i) = {0:e} is not positive")]
    NoSeparabilityPoint(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("normalization violated: {0}")]
    Normalization(String),

    #[error("optimizer initialization failed: {0}")]
    Initialization(String),
}

impl Error {
    pub(crate) fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by malformed or inadequate input data, as opposed
    /// to numerical failures during a computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::Coverage(_)
                | Error::InvalidInput(_)
                | Error::OutOfRange { .. }
        )
    }
}
