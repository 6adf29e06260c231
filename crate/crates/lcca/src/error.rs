use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum LccaError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("missing file: {0}")]
    MissingFile(String),

    #[error("missing column {column} in {file}")]
    MissingColumn { file: String, column: String },

    #[error("duplicate join key {key} in {file}")]
    DuplicateKey { file: String, key: String },

    #[error("unmapped code {code:?} in column {column} (row {row})")]
    UnmappedCode {
        column: String,
        code: String,
        row: usize,
    },

    #[error("recode produced an empty dataset: {0}")]
    EmptyResult(String),

    #[error("all weights are zero")]
    AllZeroWeights,

    #[error("invalid recode spec: {0}")]
    InvalidSpec(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("all restarts produced a degenerate (empty) class at k={0}")]
    AllChainsDegenerate(usize),

    #[error("unknown variable {0}")]
    UnknownVariable(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LccaError>;
