//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by kernel construction, exact verification, quadrature and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown catalog id `{0}`")]
    UnknownCatalog(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid spectral measure: {0}")]
    InvalidMeasure(String),

    #[error("malformed spec: {0}")]
    MalformedSpec(String),

    #[error("degenerate kernel (single atom at sigma) is excluded from this computation")]
    DegenerateKernel,

    #[error("quadrature did not reach tolerance {tol:e} within {evals} evaluations (estimate {value:e}, error {error:e})")]
    QuadratureBudget {
        tol: f64,
        evals: usize,
        value: f64,
        error: f64,
    },

    #[error("identity violated: {0}")]
    IdentityViolation(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("covariance embedding failed: {0}")]
    Embedding(String),

    #[error("kernel discretization error {error:e} exceeds threshold {threshold:e}")]
    Discretization { error: f64, threshold: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
