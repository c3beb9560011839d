use thiserror::Error;

/// Errors raised by construction and validation across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: u64, n: usize },

    #[error("party label {label} out of range 1..={n}")]
    PartyOutOfRange { label: usize, n: usize },

    #[error("party positions must be strictly increasing, got {0:?}")]
    UnsortedParties(Vec<usize>),

    #[error("malformed party pair ({0}, {1})")]
    MalformedPair(usize, usize),

    #[error("expected {expected} bits, got {got}")]
    BitCountMismatch { expected: usize, got: usize },

    #[error("bit value {0} is not 0 or 1")]
    InvalidBit(u8),

    #[error("{what} requires n <= {cap}, got n = {n}")]
    CapExceeded { what: &'static str, n: usize, cap: usize },

    #[error("state is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("matrix is not Hermitian: max deviation {deviation}")]
    NotHermitian { deviation: f64 },

    #[error("matrix trace {trace} differs from 1")]
    BadTrace { trace: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("marginals refer to different subsets: {left:?} vs {right:?}")]
    SubsetMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("W state needs at least two parties, got {0}")]
    TooFewParties(usize),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("duplicate marginal for pair ({0}, {1})")]
    DuplicatePair(usize, usize),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
