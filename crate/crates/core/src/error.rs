use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed interval: {0}")]
    MalformedInterval(String),
    #[error("expansion radius must be positive, got {0}")]
    NonPositiveRadius(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid direction: {0}")]
    InvalidDirection(String),
    #[error("merged interval count {count} exceeds cap {cap}")]
    SizeCap { count: usize, cap: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
