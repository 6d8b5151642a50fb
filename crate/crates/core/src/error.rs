use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library. Variants map one-to-one onto the failure
/// modes of the individual operations so callers (and the CLI exit-code
/// contract) can tell precondition failures from numerical ones.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative variance increment dV = {0}")]
    NegativeVarianceIncrement(f64),

    #[error("zero-variance convention broken: V stays 0 but S would become {0}")]
    BrokenZeroConvention(f64),

    #[error("non-finite increment (dS = {ds}, dV = {dv})")]
    NonFiniteIncrement { ds: f64, dv: f64 },

    #[error("invalid path state: {0}")]
    InvalidState(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("density is undefined at eta = 0")]
    UndefinedAtZero,

    #[error("value {value} outside the admissible range {range}")]
    OutOfRange { value: f64, range: String },

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid quadrature configuration: {0}")]
    InvalidQuadrature(String),

    #[error("quadrature error bound {err_bound:e} exceeds target {target:e} (ln value {value})")]
    QuadratureTargetMissed {
        value: f64,
        err_bound: f64,
        target: f64,
    },

    #[error("rho = {rho} outside {domain}")]
    InvalidRho { rho: f64, domain: &'static str },

    #[error("invalid alpha = {0}, expected 0 < alpha < 1")]
    InvalidAlpha(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bound not asserted: V = {v} <= v0 = {v0}")]
    BelowThreshold { v: f64, v0: f64 },

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("negative radicand B + ln(1/alpha) = {0}")]
    NegativeRadicand(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown adversarial generator `{0}`")]
    UnknownGenerator(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
