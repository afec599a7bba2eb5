use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The stacked channel matrix of a schedule is (numerically) singular.
    #[error("degenerate schedule: condition number {condition:.3e} exceeds limit")]
    DegenerateSchedule { condition: f64 },

    /// A closed-form expression cannot be evaluated reliably for these inputs.
    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),

    /// The request would exceed the memory budget.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A numerical decomposition failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
