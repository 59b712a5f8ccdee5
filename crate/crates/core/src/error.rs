use thiserror::Error;

/// Errors raised by the numerical kernels and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("invalid grid id {grid_id} for dimension {n}")]
    InvalidGrid { grid_id: u32, n: usize },

    #[error("invalid cube: {0}")]
    InvalidCube(String),

    #[error("empty intersection between cube and domain")]
    EmptyIntersection,

    #[error("not in the F_r family: {0}")]
    NotInFr(String),

    #[error("functions are not equivalent: {0}")]
    NotEquivalent(String),

    #[error("precondition failed [{code}]: {detail}")]
    Precondition { code: String, detail: String },

    #[error("precondition failed [{code}]: weight classification of {subject}")]
    WeightClass {
        code: String,
        subject: String,
        report: Box<crate::weights::WeightReport>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable reason code.
    pub fn code(&self) -> &str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::EmptySamples => "empty_samples",
            Error::MeshMismatch(_) => "mesh_mismatch",
            Error::InvalidGrid { .. } => "invalid_grid",
            Error::InvalidCube(_) => "invalid_cube",
            Error::EmptyIntersection => "empty_intersection",
            Error::NotInFr(_) => "not_in_fr",
            Error::NotEquivalent(_) => "not_equivalent",
            Error::Precondition { code, .. } => code,
            Error::WeightClass { code, .. } => code,
            Error::Config(_) => "config",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
