use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(String),

    #[error("nonpositive coefficient {value} at fine cell {cell}")]
    NonPositiveCoefficient { cell: usize, value: f64 },

    #[error("contrast must be at least 1, got {0}")]
    InvalidContrast(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("interface weights have not been populated for this mesh")]
    WeightsMissing,

    #[error("penalty scaling must be positive, got {0}")]
    NonPositiveScaling(f64),

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("linear solve did not reach tolerance: relative residual {residual:e}")]
    NotConverged { residual: f64 },

    #[error("block {block}: requested {requested} modes but only {available} are available")]
    TooManyModes {
        block: usize,
        requested: usize,
        available: usize,
    },

    #[error("operation requires a method {expected} space, got method {got}")]
    MethodMismatch { expected: String, got: String },

    #[error("reference solution has zero norm")]
    ZeroReferenceNorm,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("block {block}: {source}")]
    InBlock {
        block: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage}: {source}")]
    InStage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn in_block(self, block: usize) -> Self {
        Error::InBlock {
            block,
            source: Box::new(self),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::InStage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
