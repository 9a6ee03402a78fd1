use std::fmt;

/// Errors produced by every fallible operation in this crate.
///
/// Variants are grouped by what went wrong rather than by module, so callers
/// can match on the failure class without caring which layer raised it.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix argument is not finite or not symmetric within tolerance.
    InvalidMatrix(String),
    /// Operand shapes or lengths do not line up.
    Dimension(String),
    /// Input is degenerate for the requested operation (zero vector, empty
    /// population, ...).
    DegenerateInput(String),
    /// Not enough samples or frames to perform the operation.
    InsufficientData(String),
    /// A streaming operation was asked for a step that needs prior history.
    InsufficientHistory(String),
    /// A parameter is out of its documented range or otherwise malformed.
    InvalidInput(String),
    /// An eigenvector selection does not fit the basis it is applied to.
    Selection(String),
    /// A block shape is empty or does not fit inside the frame.
    InvalidBlockSize(String),
    /// The dominant eigenvalue is too close to the next one for the
    /// perturbation ratio to be meaningful; the trial should be discarded.
    SkippedDegenerate(String),
    /// An iterative solver exhausted its sweep budget before converging.
    Convergence(String),
    /// A file or directory does not exist, or no entry matched a pattern.
    NotFound(String),
    /// A file exists but its contents are not in a supported format.
    Format(String),
    /// A label file is malformed or does not cover the frame range.
    Label(String),
    /// An underlying I/O operation failed.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMatrix(m) => write!(f, "invalid matrix: {m}"),
            Error::Dimension(m) => write!(f, "dimension mismatch: {m}"),
            Error::DegenerateInput(m) => write!(f, "degenerate input: {m}"),
            Error::InsufficientData(m) => write!(f, "insufficient data: {m}"),
            Error::InsufficientHistory(m) => write!(f, "insufficient history: {m}"),
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::Selection(m) => write!(f, "selection error: {m}"),
            Error::InvalidBlockSize(m) => write!(f, "invalid block size: {m}"),
            Error::SkippedDegenerate(m) => write!(f, "degenerate dominant eigenvalue: {m}"),
            Error::Convergence(m) => write!(f, "convergence failure: {m}"),
            Error::NotFound(m) => write!(f, "not found: {m}"),
            Error::Format(m) => write!(f, "format error: {m}"),
            Error::Label(m) => write!(f, "label error: {m}"),
            Error::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
