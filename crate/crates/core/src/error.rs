use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("representations act through different groups")]
    GroupMismatch,
    #[error("invalid group table: {0}")]
    InvalidGroup(String),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("spectra live on different domains ({0} vs {1})")]
    DomainMismatch(String, String),
    #[error("spectra use different truncations")]
    TruncationMismatch,
    #[error("sample pattern is empty")]
    EmptyPattern,
    #[error("point is not valid for the domain: {0}")]
    InvalidPoint(String),
    #[error("quadrature resolution too low: {0}")]
    InsufficientResolution(String),
    #[error("invalid spherical harmonic index (l = {l}, m = {m})")]
    InvalidHarmonic { l: u32, m: i64 },
    #[error("invalid sampler: {0}")]
    InvalidSampler(String),
    #[error("invalid shell grid: {0}")]
    InvalidShells(String),
    #[error("at least two realizations are required, got {0}")]
    TooFewRealizations(u64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
