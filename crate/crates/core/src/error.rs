use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("gate touches qubit {0} more than once")]
    DuplicateQubit(usize),

    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{found} qubits exceeds the limit of {limit} for this operation")]
    TooManyQubits { found: usize, limit: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid training set: {0}")]
    InvalidTraining(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("infeasible target: requested {requested} trash qubits but at most {max} can be cleared")]
    Infeasible { requested: usize, max: usize },

    #[error("compressed state has a nonzero trash bit on qubit {0}")]
    NonzeroTrash(usize),

    #[error("malformed artifact: {0}")]
    Artifact(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A circuit-string parse failure, located by byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Malformed(String),
    ArityTooLarge(usize),
    DuplicateQubit(usize),
    QubitOutOfRange { index: usize, n_qubits: usize },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Malformed(msg) => write!(f, "malformed gate tuple: {msg}"),
            Self::ArityTooLarge(n) => write!(f, "gate tuple has {n} qubits, at most 3 allowed"),
            Self::DuplicateQubit(q) => write!(f, "qubit {q} repeated within a gate tuple"),
            Self::QubitOutOfRange { index, n_qubits } => {
                write!(f, "qubit {index} out of range for {n_qubits} qubits")
            }
        }
    }
}
