use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("partition assignment is empty")]
    EmptyAssignment,

    #[error("label {label} is outside 1..={k0}")]
    LabelOutOfRange { label: usize, k0: usize },

    #[error("{k0} classes exceed the enumeration cap of {cap}")]
    TooManyClasses { k0: usize, cap: usize },

    #[error("partition {0} merges non-adjacent classes")]
    NotOrdinal(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("cannot parse partition text {text:?}: {reason}")]
    PartitionSyntax { text: String, reason: String },

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column {column}: {reason}")]
    Parse {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("non-numeric feature {value:?} at row {row}, column {column}")]
    NonNumericFeature {
        row: usize,
        column: String,
        value: String,
    },

    #[error("dataset has a single class; nothing to combine")]
    SingleClass,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{n} points cannot fill {folds} folds")]
    TooFewPoints { n: usize, folds: usize },

    #[error("no admissible class centers after {attempts} random walks")]
    CenterGenerationTimeout { attempts: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("combined class {class} has no training points")]
    DegenerateClass { class: usize },

    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("the oracle classifier needs the true labels at prediction time")]
    MissingTruth,

    #[error("covariance matrix is not positive definite")]
    NonPositiveDefinite,

    #[error("({p1}, {p2}) is outside the open simplex p1 > 0, p2 > 0, p1 + p2 < 1")]
    OutOfOmega { p1: f64, p2: f64 },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_fold(self, fold: usize) -> Error {
        match self {
            e @ Error::Fold { .. } => e,
            e => Error::Fold {
                fold,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
