use thiserror::Error;

/// Errors produced across the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: bad dimensions, invalid mode labels, non-stochastic rows.
    #[error("invalid input: {0}")]
    Input(String),

    /// A documented precondition of the operation was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A combinatorial enumeration would exceed its configured budget.
    #[error("resource cap exceeded: {needed} pair tests required, cap is {cap}")]
    Resource { needed: u128, cap: u128 },

    /// A synthesis problem has no solution satisfying the required certificate.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
