use thiserror::Error;

/// Errors produced by the library.
///
/// [`Error::Internal`] marks a broken invariant inside the library itself; every
/// other variant is a rejection of the caller's input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("disconnected")]
    Disconnected,
    #[error("not a metric transform: {0}")]
    NotTransform(String),
    #[error("infinite distortion: points {0} and {1} collapse")]
    InfiniteDistortion(usize, usize),
    #[error("insufficient terms: need {needed}, budget {budget}")]
    InsufficientTerms { needed: usize, budget: usize },
    #[error("product too large: {0} points")]
    ProductTooLarge(usize),
    #[error("undefined Mazur image: zero norm")]
    UndefinedMazur,
    #[error("expander too small: {expander} vertices for {n} points")]
    ExpanderTooSmall { expander: usize, n: usize },
    #[error("no counterexample exists for p = {0}")]
    NoCounterexample(f64),
    #[error("size limit exceeded: {0}")]
    TooLarge(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal invariant failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
