use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("objects live on different measurable spaces")]
    SpaceMismatch,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    #[error("invalid atomic space: {0}")]
    InvalidSpace(String),

    #[error("named form `{0}` is unbounded on a truncated-countable space; tabulate it instead")]
    UnboundedFunction(String),

    #[error("matrix is not normal (relative defect {defect:.3e})")]
    NotNormal { defect: f64 },

    #[error("basis is not orthonormal (defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },

    #[error("measure {index} is not a probability measure: {reason}")]
    NotProbability { index: usize, reason: String },

    #[error("element {index} does not have unit norm (norm {norm})")]
    NotUnitNorm { index: usize, norm: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),

    #[error("operator measure is not normalized (defect {defect:.3e})")]
    NotNormalized { defect: f64 },

    #[error("invalid spectral measure: {0}")]
    InvalidSpectralMeasure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
