use thiserror::Error;

/// Errors surfaced by the library. Variants are grouped so that front ends can
/// map them onto distinct exit statuses via [`Error::kind`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not an odd prime")]
    InvalidModulus(u64),

    #[error("non-invertible element {0}")]
    NonInvertible(u64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size guard exceeded: {what} needs {needed}, limit {limit}")]
    Guard {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("numerical integrity failure: {0}")]
    Numerical(String),
}

/// Coarse classification of an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Guard,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Guard { .. } => ErrorKind::Guard,
            Error::Numerical(_) => ErrorKind::Numerical,
            _ => ErrorKind::Config,
        }
    }

    pub(crate) fn guard(what: &'static str, needed: u128, limit: u128) -> Result<()> {
        if needed > limit {
            Err(Error::Guard {
                what,
                needed,
                limit,
            })
        } else {
            Ok(())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
