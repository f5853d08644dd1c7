use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed input such as an out-of-range index or an empty cloud.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A root finder failed to bracket or converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Exhaustive enumeration requested beyond its size cap.
    #[error("size guard: {0}")]
    SizeGuard(String),
    /// A computed value contradicts a proven property; indicates a solver bug.
    #[error("internal contradiction: {0}")]
    Contradiction(String),
}
