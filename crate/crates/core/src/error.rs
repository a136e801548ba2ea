use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("user {0} has no samples")]
    MissingUser(u32),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("user {user} has an empty viewport mask; coverage is undefined")]
    EmptyUserMask { user: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invariant violated in stage `{stage}`: {msg}")]
    Invariant { stage: &'static str, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
