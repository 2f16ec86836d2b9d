use thiserror::Error;

/// Errors reported by every analysis in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("the presented shift is empty")]
    EmptyShift,
    #[error("the presentation is not irreducible")]
    NotIrreducible,
    #[error("resource limit exceeded: {what} exceeds {limit}")]
    ResourceLimit { what: &'static str, limit: usize },
    #[error("word of length {len} is shorter than the code window {window}")]
    WordTooShort { len: usize, window: usize },
    #[error("word is not in the language: {0}")]
    NotInLanguage(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("the factor code is not finite-to-one")]
    NotFiniteToOne,
    #[error("position {n} is not strictly inside a word of length {len}")]
    BadPosition { n: usize, len: usize },
    #[error("word is not a preimage of the block")]
    NotAPreimage,
    #[error("transition block is not minimal: {0}")]
    NotMinimal(String),
    #[error("class-degree trace did not stabilize within the configured limits")]
    StabilizationInconclusive,
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("relaxation is infeasible: {0}")]
    Infeasible(String),
    #[error("solver stalled after {0} iterations")]
    SolverStalled(usize),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
