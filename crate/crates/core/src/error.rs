use thiserror::Error;

/// Errors raised by the state, information and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("matrix is not unitary (max |U†U - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("parameter point has a non-finite component at index {index}")]
    NonFiniteParameter { index: usize },

    #[error("derivative failed: non-finite amplitude in column {column}")]
    DerivativeFailure { column: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("curvature routes disagree by {difference:e} (SLD commutator vs. Im<d_i psi|d_j psi>)")]
    InternalConsistency { difference: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("singular Fisher information: outcome {outcome} has P = {probability:e} but |dP| = {derivative:e}")]
    SingularFim {
        outcome: usize,
        probability: f64,
        derivative: f64,
    },

    #[error("singular information matrix (|det| = {det:e}): parameter {parameter} is unidentifiable")]
    SingularBound { parameter: String, det: f64 },

    #[error("dimension {0} out of range (2 <= d <= 6)")]
    DimensionOutOfRange(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("constraint violated: {constraint} (got {detail})")]
    ConstraintViolation { constraint: String, detail: String },

    #[error("no counts recorded")]
    NoCounts,

    #[error("degenerate configuration: {failed} of {repeats} estimates failed (sin(N theta) too close to 0)")]
    DegenerateConfiguration { failed: usize, repeats: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
