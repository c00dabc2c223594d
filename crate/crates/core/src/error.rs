use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("{n_qubits} qubits exceeds the supported maximum of {max}")]
    TooManyQubits { n_qubits: usize, max: usize },

    #[error("{context}: n = {n_qubits} exceeds the dense-simulation limit of {max}")]
    DenseLimit {
        context: &'static str,
        n_qubits: usize,
        max: usize,
    },

    #[error("observable term {term} is not Hermitian up to a real sign")]
    NonHermitianTerm { term: String },

    #[error("invalid rotation axis: {reason}")]
    InvalidAxis { reason: String },

    #[error("invalid circuit: {reason}")]
    InvalidCircuit { reason: String },

    #[error("invalid edge partition: {reason}")]
    InvalidPartition { reason: String },

    #[error("invalid noise model: {reason}")]
    InvalidNoiseModel { reason: String },

    #[error("scaled noise intensity {value} falls outside [0, 1]")]
    NoiseScale { value: f64 },

    #[error("noisy simulation only supports rotation axes of weight <= 2, got weight {weight}")]
    UnsupportedAxisWeight { weight: usize },

    #[error("sparse state has {entries} entries, exceeding the budget of {budget}")]
    EntryBudget { entries: usize, budget: usize },

    #[error("invalid sparse state: {reason}")]
    InvalidState { reason: String },

    #[error("invalid noise levels: {reason}")]
    InvalidLevels { reason: String },

    #[error("exponential extrapolation requires all values to share a sign")]
    SignMixedExponential,

    #[error("{model} extrapolation needs at least {needed} points, got {got}")]
    InsufficientPoints {
        model: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("normal equations are singular; add regularization or drop degenerate features")]
    SingularSystem,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("requested {requested} insertions but only {available} are available")]
    InsertionCount { requested: usize, available: usize },

    #[error("empty grid: {reason}")]
    EmptyGrid { reason: String },

    #[error(
        "truncation order M = {m} violates the threshold side condition: \
         ln(1 + delta/2)/(L - M) = {lhs:.6e} > ln(2)/M = {rhs:.6e}"
    )]
    SideCondition { m: usize, lhs: f64, rhs: f64 },

    #[error("invalid Pauli path: {reason}")]
    InvalidPath { reason: String },

    #[error("parse error: {reason}")]
    Parse { reason: String },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(reason: impl Into<String>) -> Self {
        Error::Parse {
            reason: reason.into(),
        }
    }
}
