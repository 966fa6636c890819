use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed table: {0}")]
    BadTable(String),
    #[error("{op} is not associative at ({a}, {b}, {c})")]
    NonAssociative { op: &'static str, a: String, b: String, c: String },
    #[error("{op} is not commutative at ({a}, {b})")]
    NonCommutative { op: &'static str, a: String, b: String },
    #[error("multiplication does not distribute over addition at ({a}, {b}, {c})")]
    NoDistributivity { a: String, b: String, c: String },
    #[error("{role} fails the unit law at {witness}")]
    BadUnit { role: &'static str, witness: String },
    #[error("{0} has no additive inverse")]
    NoNegative(String),
    #[error("invalid ideal: {0}")]
    InvalidIdeal(String),
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("invalid datum: {0}")]
    InvalidDatum(String),
    #[error("size bound exceeded: {attempted} elements (limit {limit})")]
    SizeBound { limit: usize, attempted: usize },
    #[error("saturation did not stabilize within {0} rounds")]
    DidNotStabilize(usize),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("cocycle violation: {0}")]
    CocycleViolation(String),
    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SizeBound { .. } | Error::DidNotStabilize(_) => 3,
            Error::InvariantViolation(_) => 4,
            _ => 2,
        }
    }
}
