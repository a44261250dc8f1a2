use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid face: {0}")]
    InvalidFace(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An exhaustive computation would exceed its configured budget. Oracles
    /// refuse rather than truncate.
    #[error("budget exceeded: {what} needs {count} but the budget is {budget}")]
    BudgetExceeded {
        what: String,
        count: String,
        budget: u64,
    },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("rooted graph is disconnected")]
    Disconnected,

    #[error("not a proper subtree: {0}")]
    NotProperSubtree(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
