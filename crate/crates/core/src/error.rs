use thiserror::Error;

use crate::quadrature::RefinementStep;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid manifold key {key:?}: {reason}")]
    ManifoldKey { key: String, reason: String },

    #[error("invalid manifold parameters: {0}")]
    ManifoldParams(String),

    #[error("radius {r} is outside the normal chart [0, {limit})")]
    OutsideChart { r: f64, limit: f64 },

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),

    #[error("incompatible spectral states: {0}")]
    Mismatch(String),

    #[error("level {level} (m = {m}) is not available below E_max = {e_max}")]
    UnresolvableLevel { level: usize, m: usize, e_max: f64 },

    #[error("quadrature did not converge after {} refinements (last estimate {:.3e})", trace.len(), trace.last().map_or(f64::NAN, |s| s.error_estimate))]
    QuadratureNonConvergence { trace: Vec<RefinementStep> },

    #[error("finite-difference step {h} too large: refinement changed the result by {change:.3e}")]
    StepTooLarge { h: f64, change: f64 },

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("rate fit: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::Config { field: field.to_string(), reason: reason.into() }
    }
}
