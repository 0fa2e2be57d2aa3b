use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count must be at least 1")]
    NoQubits,
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("size mismatch: expected {expected} qubits, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("repeated target qubit {0}")]
    RepeatedTarget(usize),
    #[error("operation expects {expected} targets, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("fault references location {0} which does not exist")]
    NoSuchLocation(usize),
    #[error("fault payload does not fit location {0}")]
    PayloadMismatch(usize),
    #[error("weight {weight} exceeds the {available} locations of category {category}")]
    WeightTooLarge {
        category: usize,
        weight: usize,
        available: usize,
    },
    #[error("weight vector has {got} entries, noise model has {expected} categories")]
    CategoryMismatch { expected: usize, got: usize },
    #[error("invalid noise model: {0}")]
    Noise(String),
    #[error("invalid rate estimate: {0}")]
    Rate(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown circuit `{0}`")]
    UnknownCircuit(String),
    #[error("invalid protocol: {0}")]
    Protocol(String),
    #[error("trace does not match the sample tree: {0}")]
    Trace(String),
    #[error("shot exceeded {0} circuits without terminating")]
    Runaway(usize),
    #[error("enumeration budget of {0} exceeded")]
    Budget(u64),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
