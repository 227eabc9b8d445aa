use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("truncation too small: {0}")]
    Truncation(String),

    #[error("product dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("spectrum is missing required label {0}")]
    IncompleteSpectrum(String),

    #[error("step size underflow at t = {t} ns (h = {h:e} ns)")]
    StiffIntegration { t: f64, h: f64 },

    #[error("integrator failure at t = {t} ns: {reason}")]
    IntegratorFailure { t: f64, reason: String },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("root not bracketed: {0}")]
    NotBracketed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
