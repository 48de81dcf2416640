//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to decode image {path}: {reason}")]
    ImageDecode { path: PathBuf, reason: String },

    #[error("failed to encode image {path}: {reason}")]
    ImageEncode { path: PathBuf, reason: String },

    #[error("dataset directory {0} contains no PNG images")]
    EmptyDataset(PathBuf),

    #[error("manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },

    #[error("manifest references missing file: {0}")]
    MissingFile(PathBuf),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid shape scene config: {0}")]
    SceneConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a checkpoint file: {0}")]
    NotACheckpoint(PathBuf),

    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("tensor {name}: shape {found:?} does not match expected {expected:?}")]
    ShapeMismatch {
        name: String,
        expected: Vec<u32>,
        found: Vec<u32>,
    },

    #[error("activation cache does not match: {0}")]
    StaleCache(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("training aborted at iteration {iteration}: loss is not finite (diagnostic checkpoint at {checkpoint})")]
    NonFiniteLoss { iteration: u64, checkpoint: PathBuf },

    #[error("collapsed model: counting vectors are identically zero over the evaluation set")]
    CollapsedModel,

    #[error("unknown layer {name}; available: {available}")]
    UnknownLayer { name: String, available: String },

    #[error("resume: {0}")]
    Resume(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
