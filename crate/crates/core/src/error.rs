use thiserror::Error;

use crate::painleve::OdeState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid precision configuration: {0}")]
    InvalidPrecision(String),

    /// A pivot of the moment factorization came out non-positive. The
    /// working precision was too small for the requested order.
    #[error("precision failure: pivot {index} is not positive at {work_bits} bits")]
    PrecisionFailure { index: usize, work_bits: u32 },

    #[error("moment table covers {have_min}..={have_max}, need {need_min}..={need_max}")]
    MomentRange {
        have_min: i64,
        have_max: i64,
        need_min: i64,
        need_max: i64,
    },

    #[error("degenerate recursion step at n = {n}: {what} vanished")]
    Degenerate { n: usize, what: &'static str },

    #[error("integration stopped at t = {}: {reason}", state.t.to_f64())]
    Singularity {
        reason: String,
        state: Box<OdeState>,
    },

    #[error("quadrature did not converge, last error estimate {estimate:e}")]
    QuadratureNonConvergence { estimate: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn is_precision_failure(&self) -> bool {
        matches!(self, Error::PrecisionFailure { .. })
    }
}
