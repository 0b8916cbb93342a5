use thiserror::Error;

/// Errors raised by kernel construction, expansion and certification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GkError {
    #[error("argument {name} = {value} outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("symmetric eigensolver failed to converge on a {0}x{0} matrix")]
    EigenNoConvergence(usize),

    #[error("non-finite sample in {0}")]
    NonFinite(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("spectral family refused: {0}")]
    RefusedFamily(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("numerical integration failed: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, GkError>;
