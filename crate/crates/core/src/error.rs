use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("choice {value} at level {level} is not in 1..=4")]
    InvalidChoice { level: usize, value: i64 },
    #[error("choice sequence is empty")]
    EmptyChoices,
    #[error("choice depth {0} exceeds the supported maximum")]
    DepthTooLarge(usize),
    #[error("window length must be positive")]
    EmptyWindow,
    #[error("site index range overflows: offset {offset} + length {length}")]
    IndexOverflow { offset: u64, length: u64 },
    #[error("site {0} is unresolved at the generated depth")]
    UnresolvedSite(i64),
    #[error("windows differ in start or length")]
    WindowMismatch,
    #[error("distribution is not normalized (total mass {0})")]
    UnnormalizedInput(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
