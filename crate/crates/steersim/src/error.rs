//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector length {len} is not 2^n for n in 1..={max}")]
    BadDimension { len: usize, max: usize },
    #[error("matrix is {rows}x{cols}, expected square 2^n for n in 1..={max}")]
    BadMatrixShape { rows: usize, cols: usize, max: usize },
    #[error("state norm deviates from 1 by {deviation:.3e}")]
    NotNormalized { deviation: f64 },
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("trace deviates from 1 by {deviation:.3e}")]
    TraceNotOne { deviation: f64 },
    #[error("negative eigenvalue {value:.3e} exceeds tolerance")]
    NotPositiveSemidefinite { value: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("party {party} out of range for {qubit_count} qubits")]
    PartyOutOfRange { party: usize, qubit_count: usize },
    #[error("party {party} listed twice")]
    DuplicateParty { party: usize },
    #[error("kept-party list is empty")]
    EmptyKeep,
    #[error("combined register of {total} qubits exceeds the supported maximum of {max}")]
    TooManyQubits { total: usize, max: usize },
    #[error("no variance bound known for {count} settings (2 or 3 supported)")]
    UnsupportedSettingCount { count: usize },
    #[error("steerer and steered party must differ")]
    SamePartyPair,
    #[error("operation needs a {expected}-qubit state, got {count} qubits")]
    WrongQubitCount { count: usize, expected: usize },
    #[error("probability {value} outside [0, 1]")]
    InvalidProbability { value: f64 },
    #[error("coefficient tuple has zero norm")]
    ZeroNorm,
    #[error("coefficient {value} is negative where a nonnegative amplitude is required")]
    NegativeCoefficient { value: f64 },
    #[error("steering matrix needs all {expected} ordered pairs of {party_count} parties")]
    IncompleteMatrix { expected: usize, party_count: usize },
    #[error("record has no setting aligned on axis {axis} for the requested pair")]
    MissingAlignedSetting { axis: char },
    #[error("setting {setting} has zero total counts")]
    EmptyCounts { setting: String },
    #[error("count {value} is not a nonnegative integer")]
    NonIntegerCount { value: f64 },
    #[error("record covers {got} settings, tomography needs all {expected}")]
    IncompleteTomographyRecord { got: usize, expected: usize },
    #[error("shots must be positive in sampled modes")]
    ZeroShots,
    #[error("malformed state specifier: {0}")]
    StateSpec(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
