use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("space mismatch: expected {expected}, got {got}")]
    SpaceMismatch { expected: String, got: String },

    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("degree undefined for non-proper map {0}")]
    UndefinedDegree(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("cell {cell} of dimension {dim} meets the branch image away from its vertices; subdivide")]
    SubdivisionRequired { dim: usize, cell: usize },

    #[error("fiber cardinality mismatch: {left} vs {right}")]
    CardinalityMismatch { left: usize, right: usize },

    #[error("fiber bijection bound violated: pair distance {pair} outside [{lower}, {upper}]")]
    BoundViolation { pair: f64, lower: f64, upper: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("tuple is not inside a valid spread ball: {0}")]
    InvalidSpread(String),

    #[error("arity mismatch: expected {expected} points, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("difference quotients did not converge along direction {direction:?}")]
    NonConvergent { direction: Vec<f64> },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    UnboundedLp,

    #[error("linear program solver failed: {0}")]
    Solver(String),

    #[error("chain lives on a complex not registered with this lift")]
    UnregisteredComplex,

    #[error("input is not a cycle")]
    NotACycle,

    #[error("invalid complex: {0}")]
    InvalidComplex(String),
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
