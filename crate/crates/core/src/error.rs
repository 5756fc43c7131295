use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QetError {
    #[error("dimension mismatch: expected {expected} qubits, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("register of {requested} qubits exceeds the limit of {limit}")]
    CapacityExceeded { requested: usize, limit: usize },

    #[error("expectation value has imaginary part {0:e}; operator is not Hermitian")]
    NonHermitian(f64),

    #[error("ground state is degenerate (gap {gap:e} below {tolerance:e})")]
    DegenerateGround { gap: f64, tolerance: f64 },

    #[error("feedback angle undefined: xi = eta = 0")]
    UndefinedAngle,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("branch has no measurement outcome to condition on")]
    UnlabeledBranch,

    #[error("duplicate receiver site {0}")]
    DuplicateReceiver(usize),

    #[error("observable word {word} is not diagonal in the {basis} readout basis")]
    IncompatibleBasis { word: String, basis: String },

    #[error("vertex {0} is on the boundary and has incomplete degree")]
    BoundaryVertex(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QetError>;
