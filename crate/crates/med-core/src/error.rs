use thiserror::Error;

/// Errors shared across the crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum MedError {
    /// A parameter is out of its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The two inputs cannot be compared (e.g. different topics).
    #[error("invalid pair: {0}")]
    InvalidPair(String),

    /// A run violates a structural rule, such as a repeated document.
    #[error("malformed run: {0}")]
    MalformedRun(String),

    /// A measure definition is not usable (e.g. a discount that increases
    /// with rank, or a graded scale where a binary one is required).
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// The requested measure cannot be computed for this input kind.
    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    /// The problem exceeds an enumeration or solver size limit.
    #[error("too large: {0}")]
    TooLarge(String),

    /// A text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
