use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed interval: length {0} must lie strictly between 0 and 2*pi")]
    MalformedInterval(f64),

    #[error("cover needs at least 3 intervals, got {0}")]
    CoverTooSmall(usize),

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("transition arc of length {len} too short for rise {d} with slope margin")]
    TransitionTooShort { len: f64, d: f64 },

    #[error("displacement {disp} is not strictly below the bound {bound}")]
    DisplacementTooLarge { disp: f64, bound: f64 },

    #[error("samples are not strictly increasing at index {0}")]
    NotMonotone(usize),

    #[error("grid size {0} must be a power of two >= 16")]
    BadGridSize(usize),

    #[error("grid sizes differ: {0} vs {1}")]
    GridMismatch(usize, usize),

    #[error("root bracketing failed at sample {0} (invalid sigma?)")]
    BracketFailure(usize),

    #[error("support covers the whole circle (deviation {0} everywhere)")]
    FullSupport(f64),

    #[error("factor count {m} too small: per-factor displacement {per} >= {d}")]
    FactorCountTooSmall { m: usize, per: f64, d: f64 },

    #[error("sample {index} outside the logarithm chart domain (|theta| = {angle})")]
    OutsideChart { index: usize, angle: f64 },

    #[error("matrix is not unitary within tolerance: deviation {0}")]
    NotUnitary(f64),

    #[error("group descriptors do not match: {0} vs {1}")]
    GroupMismatch(String, String),

    #[error("unsupported group descriptor {0}")]
    UnsupportedGroup(String),

    #[error("{0}")]
    Precondition(String),

    #[error("rewrite blocked: {0}")]
    RewriteBlocked(String),

    #[error("derivation invalid at step {step}: {reason}")]
    InvalidDerivation { step: usize, reason: String },

    #[error("dangling element id {0}")]
    DanglingId(usize),

    #[error("{path}: {message}")]
    File { path: String, message: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
