use std::path::PathBuf;

/// Errors produced anywhere in the detection pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty window")]
    EmptyWindow,

    #[error("untrained: detector has not been fit on any window")]
    Untrained,

    #[error("{detector} needs at least {need} records, got {got}")]
    TooFewRecords { detector: &'static str, need: usize, got: usize },

    #[error("exact-storm query against an empty stream buffer")]
    EmptyBuffer,

    #[error("negative distance argument: {0}")]
    NegativeDistance(f64),

    #[error("abod: no pair of reference points differs from the query")]
    NoValidPairs,

    #[error("scaler needs at least 2 observations, has {0}")]
    InsufficientStatistics(u64),

    #[error("kitnet is still in its grace period (feature map not learned)")]
    GracePeriod,

    #[error("unknown detector `{0}`; valid kinds: ocsvm, iforest-asd, lof, abod, exact-storm, kitnet, knn-cad")]
    UnknownDetector(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("contamination must lie in (0, 0.5) with n*contamination >= 1, got {0}")]
    InvalidContamination(f64),

    #[error("train fraction must lie strictly between 0 and 1 and leave both parts non-empty, got {0}")]
    InvalidFraction(f64),

    #[error("stratified split needs both classes in the dataset")]
    MissingClass,

    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),

    #[error("unmappable label value `{value}` on data row {row}")]
    BadLabel { row: usize, value: String },

    #[error("record at seq {0} has no label")]
    Unlabeled(u64),

    #[error("{0}: file is empty")]
    EmptyFile(PathBuf),

    #[error("{0}: no usable rows")]
    NoUsableRows(PathBuf),

    #[error("undefined AUC: scores need at least one positive and one negative label")]
    SingleClass,

    #[error("score at position {0} is not finite")]
    NonFiniteScore(usize),

    #[error("length mismatch: {scores} scores vs {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },

    #[error("cannot load dataset {0}")]
    DatasetLoad(String),

    #[error("refusing to write an empty report")]
    EmptyReport,

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
