use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the prediction, fitting and oracle routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A frequency fell outside a tabulated spectrum under strict extrapolation.
    #[error("frequency {omega} rad/us outside tabulated range [{low}, {high}] rad/us")]
    Range { omega: f64, low: f64, high: f64 },

    /// A derived quantity came out with the wrong sign (e.g. negative photon number).
    #[error("sign error: {0}")]
    Sign(String),

    #[error("fit failed: {reason}")]
    Fit {
        reason: String,
        iterations: usize,
        residual_norm: f64,
    },

    /// The integrator lost trace, Hermiticity or positivity beyond tolerance.
    #[error("integration unstable at t = {time} us: {detail}; retry with dt <= {suggested_dt:.3e} us")]
    Stability {
        time: f64,
        detail: String,
        suggested_dt: f64,
    },

    #[error("parse error in {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn fit(reason: impl Into<String>, iterations: usize, residual_norm: f64) -> Self {
        Error::Fit {
            reason: reason.into(),
            iterations,
            residual_norm,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Range { .. } => "range",
            Error::Sign(_) => "sign",
            Error::Fit { .. } => "fit",
            Error::Stability { .. } => "stability",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
