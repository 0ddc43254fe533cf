use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("singular configuration: sites {i} and {j} are {distance:e} apart (floor {floor:e})")]
    Singular {
        i: usize,
        j: usize,
        distance: f64,
        floor: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("acceptance rate {rate:.3} outside [{lo}, {hi}]; trial radius {trial_radius} is mis-tuned")]
    AcceptanceOutOfRange {
        rate: f64,
        lo: f64,
        hi: f64,
        trial_radius: f64,
    },

    #[error("minimiser did not converge after {iterations} iterations (|grad|_inf = {grad_norm:e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },

    #[error("stationary point is a saddle: eigenvalue {eigenvalue:e} below -{tolerance:e}")]
    Saddle { eigenvalue: f64, tolerance: f64 },

    #[error("degenerate minimum: {0}")]
    Degenerate(String),

    #[error("integrator unstable: dt = {dt} exceeds limit {limit}")]
    Stability { dt: f64, limit: f64 },

    #[error("fit window too small: {found} points, need {needed}")]
    WindowTooSmall { found: usize, needed: usize },

    #[error("no stable power-law window found")]
    NoStableWindow,

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("ensemble member {index} does not match: {reason}")]
    MismatchedEnsemble { index: usize, reason: String },

    #[error("insufficient samples: {found} < {needed}")]
    InsufficientSamples { found: usize, needed: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("campaign failed: {0}")]
    CampaignFailed(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

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
