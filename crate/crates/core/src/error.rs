use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {0} out of range")]
    QubitOutOfRange(usize),
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    SameQubit(usize),
    #[error("indices must be pairwise distinct: {0:?}")]
    IndicesNotDistinct(Vec<usize>),
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("matrix is singular over GF(2)")]
    Singular,
    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),
    #[error("parameter matrix must have a zero third column")]
    NonZeroThirdColumn,
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("coupling graph does not connect qubits {0} and {1}")]
    Disconnected(usize, usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("screening kept {found} cosets, expected {expected}; near-threshold cosets: {near:?}")]
    SurvivorCount {
        found: usize,
        expected: usize,
        near: Vec<(usize, f64)>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
