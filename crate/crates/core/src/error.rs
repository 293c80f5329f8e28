use thiserror::Error;

use crate::circuit::{NodeId, ValidationReport, Var};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable indices start at 1")]
    ZeroVar,

    #[error("node {node} references missing node {child}")]
    DanglingChild { node: usize, child: usize },

    #[error("root {0} is not a node of the circuit")]
    BadRoot(usize),

    #[error("variable {0} is not part of the declared universe")]
    VarOutsideUniverse(Var),

    #[error("cycle detected through node {0}")]
    Cycle(NodeId),

    #[error("invalid circuit: {0}")]
    Invalid(ValidationReport),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("no weight given for variable {0}")]
    MissingWeight(Var),

    #[error("weight of variable {0} is outside [0, 1]")]
    WeightOutOfRange(Var),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("universe has {size} variables, enumeration is capped at {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("relation `{relation}` has arity {expected}, but {found} arguments were given")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },

    #[error("malformed query: {0}")]
    Query(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
