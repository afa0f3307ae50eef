use thiserror::Error;

/// Errors produced by the calibration toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("prob out of range: {0} is not in [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("label must be 0 or 1, got {0}")]
    InvalidLabel(i64),

    #[error("invalid clip epsilon {0}: must satisfy 0 < epsilon < 0.5")]
    InvalidClip(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("class label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("length mismatch: {left} distributions but {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("number of bins must be at least 1")]
    InvalidBinCount,

    #[error("invalid grid size {0}: need at least 2 points")]
    InvalidGridSize(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("covariance {} is not symmetric", describe_index(*.index))]
    NotSymmetric { index: Option<usize> },

    #[error("covariance {} is not positive-definite", describe_index(*.index))]
    NotPositiveDefinite { index: Option<usize> },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("row {row}: {reason}")]
    Csv { row: u64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn describe_index(index: Option<usize>) -> String {
    match index {
        Some(i) => format!("at index {i}"),
        None => "matrix".to_string(),
    }
}

impl Error {
    /// Attach a prediction index to covariance errors raised for a single matrix.
    pub(crate) fn at_index(self, i: usize) -> Self {
        match self {
            Error::NotSymmetric { index: None } => Error::NotSymmetric { index: Some(i) },
            Error::NotPositiveDefinite { index: None } => {
                Error::NotPositiveDefinite { index: Some(i) }
            }
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
