use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("basis: {0}")]
    Basis(String),

    #[error("demagnetizing field unsupported for a {0}-dimensional grid (set demag = false)")]
    DemagDimension(usize),

    #[error(
        "anisotropy argument outside the extension domain: |z|^2 = {norm_sq} > 1 + delta = {limit}"
    )]
    ExtensionDomain { norm_sq: f64, limit: f64 },

    #[error("time step {dt} exceeds the stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("solver configuration: {0}")]
    SolverConfig(String),

    #[error("numerical blow-up at t = {time}: non-finite coefficients")]
    BlowUp { time: f64 },

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
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
