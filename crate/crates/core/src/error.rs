use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument is outside the region where the operation is defined.
    #[error("{name} = {value} is out of range: expected {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("{0}")]
    Precondition(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not positive semidefinite (pivot {pivot:e})")]
    NotPositiveSemidefinite { pivot: f64 },
    #[error("circulant embedding has negative eigenvalue {eigenvalue:e}")]
    NegativeEmbedding { eigenvalue: f64 },
    #[error("dense covariance supports p <= {max}, got {p}")]
    TooLarge { p: usize, max: usize },
}

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        expected,
    }
}

/// Returns `Ok(())` when `ok` holds, otherwise a [`Error::Domain`].
pub(crate) fn ensure(ok: bool, name: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(domain(name, value, expected))
    }
}
