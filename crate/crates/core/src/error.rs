use std::path::PathBuf;

/// Every failure the library can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("decomposition is not real: slot {slot} has imaginary part {imag:e}")]
    NonRealDecomposition { slot: usize, imag: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("CFL violation: dt = {dt:e} exceeds the limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-finite state at t = {t:e}")]
    NonFiniteState { t: f64 },

    #[error("rest mass would become non-positive (m = {m:e}) at t = {t:e}")]
    MassNonPositive { t: f64, m: f64 },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Io { .. } => 3,
            Error::NonRealDecomposition { .. }
            | Error::Domain(_)
            | Error::CflViolation { .. }
            | Error::NonFiniteState { .. }
            | Error::MassNonPositive { .. }
            | Error::GridMismatch(_) => 4,
            Error::SchemaMismatch(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
