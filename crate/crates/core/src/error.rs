use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operands live on different Hilbert spaces")]
    SpaceMismatch,

    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (max |A - A†| = {0:e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("incompatible scenario: {0}")]
    IncompatibleScenario(String),

    /// Integration diagnostics (trace drift, lost positivity, norm underflow).
    /// Usually means the step ceiling is too coarse for the model.
    #[error("numerical integrity violated: {0}")]
    Integrity(String),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Integrity(_))
    }
}
