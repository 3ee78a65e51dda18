use thiserror::Error;

/// Errors raised by the counting, quadrature and special-function routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{a} is not invertible modulo {q}")]
    NotInvertible { a: i64, q: u64 },

    #[error("modulus must be at least 1, got {0}")]
    InvalidModulus(u64),

    #[error("no integers in the open interval ({x}, {})", 2.0 * x)]
    EmptyRange { x: f64 },

    #[error("quadrature did not converge after {depth} refinements (last change {last_change:e})")]
    QuadratureNotConverged { depth: u32, last_change: f64 },

    #[error("Salie sums need an odd modulus, got {0}")]
    EvenModulus(u64),

    #[error("{0} is not prime")]
    CompositeModulus(u64),

    #[error("outside validated range: {0}")]
    OutOfValidatedRange(String),

    #[error("Gamma has a pole at {0}")]
    PoleAtNonpositiveInteger(f64),

    #[error("invalid r: {0}")]
    InvalidR(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Process exit code for the batch front-end: 3 for numerical
    /// non-convergence, 2 for everything that is a bad request.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::QuadratureNotConverged { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
