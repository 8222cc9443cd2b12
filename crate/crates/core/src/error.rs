use thiserror::Error;

use crate::fit::FitResult;

/// Errors raised by the model, fitter and decision engine.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input violates a documented invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: need at least {needed} observations with distinct times, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// The observations cannot identify the curve (e.g. constant penetration).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The fitter exhausted its iteration budget. Carries the best parameters seen.
    #[error("fit did not converge within the iteration budget (best rmse {:.6e})", best.residual_rmse)]
    NonConvergence { best: Box<FitResult> },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Domain(_) => "domain",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::DegenerateData(_) => "degenerate_data",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Parse(_) => "parse",
        }
    }

    /// True for failures of the numerical procedure rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
