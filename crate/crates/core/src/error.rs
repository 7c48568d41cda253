use thiserror::Error;

/// Errors surfaced by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),
    /// A computation would exceed its documented size budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// Floating-point evaluation could not certify an exact result.
    #[error("precision failure: {0}")]
    Precision(String),
    /// No optimal embedding of the quadratic order exists in the host order.
    #[error("discriminant {0} is not represented by the Gross lattice")]
    NotRepresented(i64),
    /// A runtime certificate failed; indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::Budget(_) | Error::NotRepresented(_) => 1,
            Error::Precision(_) | Error::Internal(_) | Error::Io(_) => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}
macro_rules! internal {
    ($($arg:tt)*) => { $crate::error::Error::Internal(format!($($arg)*)) };
}
pub(crate) use domain;
pub(crate) use internal;
