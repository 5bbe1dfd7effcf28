use thiserror::Error;

/// Errors raised by state construction, protocol simulation and embeddings.
#[derive(Debug, Error)]
pub enum Error {
    #[error("register label `{0}` is declared more than once")]
    LabelCollision(String),

    #[error("unknown register label `{0}`")]
    UnknownLabel(String),

    #[error("register `{0}` must have positive width")]
    ZeroWidth(String),

    #[error("register sets overlap on `{0}`")]
    OverlappingSets(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("layouts differ: {0}")]
    LayoutMismatch(String),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("distribution is not a product distribution (max deviation {0:e})")]
    NotProduct(f64),

    #[error("simulation cap exceeded: {0}")]
    CapExceeded(String),

    #[error("input out of range: {0}")]
    OutOfRange(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("invariance violated (max deviation {0:e})")]
    InvarianceViolated(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
