use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("root search failed: {0}")]
    Convergence(String),

    #[error("closed-form equilibrium is not available for custom incidence")]
    UnsupportedFamily,

    #[error("grid has {0} points, at least 3 are required")]
    GridTooSmall(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-positive state at grid point {index} (u = {u}, v = {v})")]
    NonPositiveState { index: usize, u: f64, v: f64 },

    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("time step {0} underflows")]
    StepUnderflow(f64),

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("no table row for table {table} {mode} set {set}")]
    UnknownRow { table: u8, mode: String, set: u8 },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("config validation error: {0}")]
    ConfigValidation(String),

    #[error("invalid initial profile `{0}`")]
    Profile(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
