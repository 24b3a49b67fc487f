use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("hierarchy contains a cycle through node `{0}`")]
    Cycle(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("node index {0} out of range")]
    Index(usize),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("unknown label `{label}` at {path}:{line}")]
    UnknownLabel {
        label: String,
        path: PathBuf,
        line: usize,
    },
    #[error("every node was pruned from the hierarchy")]
    EmptyHierarchy,
    #[error("feature width mismatch: model expects {expected}, input has {actual}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("value {value} at ({row}, {col}) is outside [0, 1]")]
    Range { row: usize, col: usize, value: f64 },
    #[error("neighbor pool has {available} usable instances, {required} required")]
    PoolTooSmall { required: usize, available: usize },
    #[error("at least 2 points are required, got {0}")]
    TooFewPoints(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("ground truth has no positive cells")]
    EmptyTruth,
    #[error("unsupported significance level {0} (expected 0.05 or 0.10)")]
    UnsupportedAlpha(f64),
    #[error("unsupported number of algorithms {0} (critical-value table covers 2..=10)")]
    UnsupportedAlgorithmCount(usize),
    #[error("missing feature value at row {row}, column {col}; impute before training")]
    MissingValue { row: usize, col: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("model format: {0}")]
    Format(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Cycle(_) => "cycle",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::Index(_) => "index",
            Error::Parse { .. } => "parse",
            Error::UnknownLabel { .. } => "unknown_label",
            Error::EmptyHierarchy => "empty_hierarchy",
            Error::WidthMismatch { .. } => "width_mismatch",
            Error::Range { .. } => "range",
            Error::PoolTooSmall { .. } => "pool_too_small",
            Error::TooFewPoints(_) => "too_few_points",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::EmptyTruth => "empty_truth",
            Error::UnsupportedAlpha(_) => "unsupported_alpha",
            Error::UnsupportedAlgorithmCount(_) => "unsupported_algorithm_count",
            Error::MissingValue { .. } => "missing_value",
            Error::Config(_) => "config",
            Error::Format(_) => "format",
            Error::Io { .. } => "io",
        }
    }

    /// True for errors caused by bad input data rather than a bug or I/O failure.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Format(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
