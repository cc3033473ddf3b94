use thiserror::Error;

/// Unified error type for the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad run parameters (unsupported modulation, empty sweep, guard exceeded, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Operand dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A factorization hit a zero / non-positive-definite pivot.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// The iterative inverse stopped contracting.
    #[error("iteration diverged: {0}")]
    Divergence(String),

    /// Non-finite values or an invalid numeric intermediate.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A statistical routine was called outside its regime of validity.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An input symbol is not a member of the constellation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems,
    /// 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Shape(_) | Error::Domain(_) => 2,
            Error::Singular(_) | Error::Divergence(_) | Error::Numeric(_) | Error::Precondition(_) => 3,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
