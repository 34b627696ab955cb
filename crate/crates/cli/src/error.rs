use bisector_core::error::{HarmonicError, LieError, LineError, MeasureError, OrbitError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("tolerance breach: {0}")]
    Tolerance(String),
    #[error("resource cap: {0}")]
    Resource(String),
    #[error("i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Line(#[from] LineError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for configuration and everything unexpected, 2 for a failed
    /// verification, 3 when an enumeration hits its size cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Tolerance(_) => 2,
            CliError::Resource(_) | CliError::Orbit(OrbitError::FrontierExplosion { .. }) => 3,
            _ => 1,
        }
    }
}
