use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent configuration of a grid, basis, pulse or
    /// functional.
    #[error("configuration error: {0}")]
    Config(String),

    /// The spatial grid cannot represent the requested vibrational levels.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Negative angular momentum and similar out-of-domain arguments.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("time step {dt} too large for the Chebyshev expansion ({terms} terms needed, max {max_terms}); try dt <= {suggested_dt}")]
    StepSize {
        dt: f64,
        terms: usize,
        max_terms: usize,
        suggested_dt: f64,
    },

    #[error("non-finite value encountered at time step {step}")]
    NumericalBlowup { step: usize },

    #[error("Krotov iteration {iteration} increased J_T from {before:.12e} to {after:.12e}; increase the step-size parameter lambda (currently {lambda:e})")]
    NonMonotonic {
        iteration: usize,
        before: f64,
        after: f64,
        lambda: f64,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Whether the error came from the numerics rather than from the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepSize { .. } | Error::NumericalBlowup { .. } | Error::NonMonotonic { .. }
        )
    }
}
