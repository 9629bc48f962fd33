use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("label space must contain at least one label")]
    EmptyLabelSpace,
    #[error("label names must be non-empty")]
    EmptyLabelName,
    #[error("duplicate label name `{0}`")]
    DuplicateLabel(String),
    #[error("{labels} labels exceed the enumeration limit of {limit}")]
    EnumerationTooLarge { labels: usize, limit: usize },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("missing value for label `{0}`")]
    MissingLabel(String),
    #[error("label index {index} out of range for {labels} labels")]
    IndexOutOfRange { index: usize, labels: usize },
    #[error("dimension mismatch: expected {expected} labels, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label spaces differ")]
    SpaceMismatch,
    #[error("label value must be 0 or 1, got {0}")]
    InvalidBit(i64),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("smoothing epsilon must be finite and non-negative, got {0}")]
    InvalidEpsilon(f64),
    #[error("label `{label}` has degenerate marginal count {count} of {n} (use epsilon > 0)")]
    DegenerateMarginal { label: String, count: usize, n: usize },
    #[error("labels `{first}` and `{second}` never co-occur (use epsilon > 0)")]
    DegenerateJoint { first: String, second: String },
    #[error("mutual information needs two distinct labels, got index {0} twice")]
    SameIndex(usize),

    #[error("non-finite logit for label `{label}`")]
    NonFiniteLogit { label: String },
    #[error("probability for label `{label}` must lie in (0, 1], got {value}")]
    InvalidProbability { label: String, value: f64 },
    #[error("alpha must be finite and non-negative, got {0}")]
    NegativeAlpha(f64),
    #[error("no alphas given")]
    EmptyAlphaGrid,
    #[error("no gold labels for id `{0}`")]
    MissingGold(String),
    #[error("record `{id}`: {source}")]
    Record {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("prediction and gold lengths differ ({pred} vs {gold})")]
    LengthMismatch { pred: usize, gold: usize },
    #[error("no instances to evaluate")]
    EmptyInput,

    #[error("incomplete annotation for `{id}`: {reason}")]
    IncompleteAnnotation { id: String, reason: String },

    #[error("duplicate response for id `{id}`, label `{label}`")]
    DuplicateResponse { id: String, label: String },
    #[error("missing or unparseable response for id `{id}`, label `{label}`")]
    MissingResponse { id: String, label: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn for_record(id: &str, source: Error) -> Self {
        Error::Record {
            id: id.to_string(),
            source: Box::new(source),
        }
    }

    /// Whether this error originates from the filesystem rather than from input validation.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Record { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
