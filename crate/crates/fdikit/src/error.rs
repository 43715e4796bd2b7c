//! Crate-wide error type.

use thiserror::Error;

use crate::trace::CutKind;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    // ---- event pairing ----
    #[error("unmatched phase event: {0}")]
    UnmatchedEvent(String),
    #[error("phase nesting violation: {0}")]
    NestingViolation(String),

    // ---- ingest ----
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("unknown boundary token {token:?} at {path}:{line} (expected start|end)")]
    UnknownBoundary {
        path: String,
        line: usize,
        token: String,
    },
    #[error("trace failed validation: {0}")]
    Validation(String),
    #[error("catalog references missing file: {0}")]
    MissingFile(String),
    #[error("duplicate scenario id in catalog: {0}")]
    DuplicateScenario(String),
    #[error("invalid synthesis spec: {0}")]
    InvalidSynthSpec(String),

    // ---- segmentation ----
    #[error("no phase interval of type {0:?}")]
    EmptyPhase(String),
    #[error("segment too small ({context}): fewer than 2 samples remain")]
    EmptySegment { context: String },
    #[error("uninformed cut requires a full segment, got {0}")]
    NotFull(CutKind),
    #[error("phase selector {selector:?} not permitted at knowledge level {level:?}")]
    SelectorNotPermitted { selector: String, level: String },

    // ---- regression / passports ----
    #[error("too few samples: have {have}, need {need}")]
    TooFewSamples { have: usize, need: usize },
    #[error("singular fit: {0}")]
    SingularFit(String),
    #[error("regression degree {0} unsupported (expected 1 or 2)")]
    UnsupportedDegree(u8),
    #[error("normalized time {0} outside [0, 1]")]
    Domain(f64),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("segments disagree on key: {0}")]
    MixedKey(String),
    #[error("passport input contains non-normal label {0:?}")]
    NonNormalLabel(String),
    #[error("passport key does not match segment: {0}")]
    KeyMismatch(String),
    #[error("passport missing for key {0}")]
    MissingPassport(String),

    // ---- datasets / ml ----
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),
    #[error("class {label:?} has {have} rows, fewer than k = {k}")]
    ClassTooSmall { label: String, have: usize, k: usize },
    #[error("unknown algorithm tag {0:?}")]
    UnknownAlgorithm(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    // ---- sweep ----
    #[error("invalid sweep axis: {0}")]
    InvalidAxis(String),
    #[error("case {case_id} failed: {source}")]
    Case {
        case_id: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid configuration: {0}")]
    Config(String),

    // ---- io ----
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
