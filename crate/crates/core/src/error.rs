use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error("{n_qubits} qubits exceeds the dense-matrix cap of {cap}")]
    CapExceeded { n_qubits: usize, cap: usize },
    #[error("state is not normalized: |psi|^2 = {0}")]
    Unnormalized(f64),
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("unsupported element: {0}")]
    UnsupportedElement(String),
    #[error("nuclei {0} and {1} coincide")]
    CoincidentNuclei(usize, usize),
    #[error("invalid molecule: {0}")]
    InvalidMolecule(String),
    #[error("SCF did not converge after {0} iterations")]
    ScfNotConverged(usize),
    #[error("Pauli term sets differ between displaced geometries")]
    TermSetMismatch,
    #[error("sample cache has no entry for term {0}")]
    CacheMiss(String),
    #[error("stability guard violated: {0}")]
    Stability(String),
    #[error("non-finite state at step {step}: {what}")]
    NonFinite { step: usize, what: String },
    #[error("optimizer stalled: {0}")]
    OptimizerStall(String),
    #[error("analysis window error: {0}")]
    Window(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
