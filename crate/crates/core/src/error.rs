use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a sample needs at least 2 classes, got {0}")]
    TooFewClasses(usize),

    #[error("logit {index} is not finite ({value})")]
    NonFiniteLogit { index: usize, value: f64 },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("sample {index} has {found} classes, dataset has {expected}")]
    ClassCountMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),

    #[error("NLL clip must be positive, got {0}")]
    InvalidClip(f64),

    #[error("confidence {0} outside [0, 1]")]
    ConfidenceOutOfRange(f64),

    #[error("bin count must be at least 1")]
    ZeroBins,

    #[error("Laplace scale must be non-negative, got {0}")]
    NegativeScale(f64),

    #[error("invalid epsilon {0}: must be positive (or infinite)")]
    InvalidEpsilon(f64),

    #[error("invalid sensitivity {0}: must be non-negative and finite")]
    InvalidSensitivity(f64),

    #[error(
        "privacy budget exhausted{}: spent {spent}, requested {requested}, total {total}",
        source_id.map(|id| format!(" on source {id}")).unwrap_or_default()
    )]
    BudgetExhausted {
        source_id: Option<usize>,
        spent: f64,
        requested: f64,
        total: f64,
    },

    #[error("sensitivity {found} does not match {kind} (expected {expected})")]
    SensitivityMismatch {
        kind: &'static str,
        expected: f64,
        found: f64,
    },

    #[error("no responses to aggregate")]
    NoResponses,

    #[error("response length mismatch: expected {expected}, got {found}")]
    ResponseMismatch { expected: usize, found: usize },

    #[error("invalid search interval [{t_min}, {t_max}]")]
    InvalidInterval { t_min: f64, t_max: f64 },

    #[error("search needs at least one iteration")]
    ZeroIterations,

    #[error("no private sources supplied")]
    NoSources,

    #[error("insufficient data: {needed} samples requested for sources, dataset has {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{context}: {source}")]
    Trial {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
