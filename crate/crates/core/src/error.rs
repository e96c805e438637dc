use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the classifier pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("gate acts on qubit {0} twice")]
    RepeatedQubit(usize),

    #[error("parameter slot {slot} missing (circuit has {n_params} parameters)")]
    MissingParameter { slot: usize, n_params: usize },

    #[error("expected {expected} parameters, got {actual}")]
    ParamLengthMismatch { expected: usize, actual: usize },

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("probability {name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("state dimension {actual} does not match {expected}")]
    StateDimension { expected: usize, actual: usize },

    #[error("readout Bloch vector has zero norm")]
    DegenerateReadout,

    #[error("Bloch vector has no defined direction (zero norm)")]
    UndefinedDirection,

    #[error("class {0} readout states cancel out; its centroid has zero norm")]
    DegenerateCluster(usize),

    #[error("quantum labels {0} and {1} coincide")]
    DuplicateLabels(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("feature {index} = {value} is outside [0, 1]")]
    FeatureOutOfRange { index: usize, value: f64 },

    #[error("at least {needed} classes are required, got {actual}")]
    TooFewClasses { needed: usize, actual: usize },

    #[error("class {0} has no instances")]
    EmptyClass(usize),

    #[error("class {class} has {available} instances, {needed} required")]
    InsufficientInstances {
        class: usize,
        needed: usize,
        available: usize,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown class name `{0}`")]
    UnknownClass(String),

    #[error("bad IDX magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("non-finite objective value at evaluation {0}")]
    NonFinite(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
