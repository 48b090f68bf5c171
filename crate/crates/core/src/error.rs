use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by corpus loading, resource compilation, training and inference.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: field `{field}`: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },

    #[error("record {id}: spans [{a_start},{a_end}) role={a_role} and [{b_start},{b_end}) role={b_role} overlap")]
    OverlappingSpans {
        id: String,
        a_start: usize,
        a_end: usize,
        a_role: String,
        b_start: usize,
        b_end: usize,
        b_role: String,
    },

    #[error("record {id}: {message}")]
    InvalidRecord { id: String, message: String },

    #[error("annotation matrix: {0}")]
    Matrix(String),

    #[error("cannot split {n} records into {k} folds")]
    BadFold { n: usize, k: usize },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("training requires at least two classes, got {0}")]
    SingleClass(usize),

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("feature row does not match the model schema: {0}")]
    SchemaMismatch(String),

    #[error("prediction vectors have different lengths ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },

    #[error("utterance is empty")]
    EmptyUtterance,

    #[error("no argument annotations in the corpus; skipped agents: {0}")]
    NoArgumentAnnotations(String),

    #[error("model artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
