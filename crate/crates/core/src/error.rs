use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Stokes vector is not fully polarized (degree of polarization {dop:.12})")]
    NotFullyPolarized { dop: f64 },

    #[error("zero-magnitude circular amplitude: total absorption is outside the plate model")]
    ZeroAmplitude,

    #[error("invalid GNP response: {0}")]
    InvalidResponse(String),

    #[error("transmitter and receiver positions coincide")]
    CoincidentPoints,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("channel vector has zero norm")]
    ZeroChannel,

    #[error("DC bias violated at transmitter {index}: |s| = {value:.6} exceeds I_DC = {limit:.6}")]
    DcBiasViolation { index: usize, value: f64, limit: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last step {last_step:.3e} rad)")]
    NoConvergence {
        iterations: usize,
        last_step: f64,
        last: Vec<f64>,
    },

    #[error("secrecy rate needs at least one eavesdropper rate")]
    EmptyEveList,

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("measured response table: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
