use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("hermitian norm check failed: {0}")]
    HauptNorm(String),
    #[error("class enumeration reached its ceiling before meeting the mass: {0}")]
    EnumerationCeiling(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("matrix is not weighted-symmetric: {0}")]
    NotSelfAdjoint(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
