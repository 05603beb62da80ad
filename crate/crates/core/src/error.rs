use thiserror::Error;

use crate::circuit::GateKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gate {0:?} requires an angle")]
    MissingAngle(GateKind),
    #[error("gate {0:?} does not take an angle")]
    UnexpectedAngle(GateKind),
    #[error("gate {0:?} has no matrix representation")]
    NoMatrix(GateKind),
    #[error("unknown gate kind `{0}`")]
    UnknownGate(String),
    #[error("invalid operation: {0}")]
    InvalidOp(String),
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("classical bit {index} out of range for {num_clbits} clbits")]
    ClbitOutOfRange { index: usize, num_clbits: usize },
    #[error("circuit has {num_qubits} qubits, above the dense simulation cap of {cap}")]
    QubitCapExceeded { num_qubits: usize, cap: usize },
    #[error("operation {0} is not unitary; use the mid-circuit simulator")]
    NonUnitaryOp(String),
    #[error("{count} mid-circuit measurements exceed the branch cap of {cap}")]
    BranchCapExceeded { count: usize, cap: usize },
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("malformed bitstring `{0}`")]
    MalformedBitstring(String),
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("address {0} has no recorded shots")]
    EmptyAddress(usize),
    #[error("address and data qubit sets overlap at qubit {0}")]
    OverlappingSets(usize),
    #[error("unknown option `{0}`")]
    UnknownOption(String),
    #[error("cut plan does not match circuit: {0}")]
    PlanMismatch(String),
    #[error("missing QPD coefficient for job `{0}`")]
    MissingCoefficient(String),
    #[error("unsupported observable factor `{0}`")]
    UnsupportedObservable(char),
    #[error("non-finite loss at iteration {0}")]
    NonFiniteLoss(usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("malformed PGM: {0}")]
    Pgm(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
