use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("{what} did not converge within {iterations} iterations")]
    DidNotConverge { what: &'static str, iterations: usize },
}

pub type Result<T> = std::result::Result<T, SdaError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SdaError::InvalidInput(msg.into()))
}
