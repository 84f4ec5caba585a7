use thiserror::Error;

/// Errors produced by fitting, tuning and simulation routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value at index {index} in {context}")]
    NonFinite { context: &'static str, index: usize },

    #[error("non-finite objective value at step-length {nu} during line search")]
    NonFiniteAt { nu: f64 },

    #[error("base-learner fit is identically zero; no step-length is defined")]
    DegenerateLearner,

    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),

    #[error("invalid usage: {0}")]
    Usage(String),

    #[error("boosting iteration {iteration}: {source}")]
    Engine {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::Engine {
            iteration,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
