use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image has no foreground pixels")]
    EmptyImage,

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("dimension mismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bad magic number: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },

    #[error("file truncated: {0}")]
    TruncatedFile(String),

    #[error("manifest row {row}: missing file {}", path.display())]
    MissingFile { row: usize, path: PathBuf },

    #[error("cell count {k} does not divide dimension {dim}")]
    BadCellCount { k: usize, dim: usize },

    #[error("image {rows}x{cols} is smaller than the required {min}x{min}")]
    ImageTooSmall { rows: usize, cols: usize, min: usize },

    #[error("zoning grid {grid_rows}x{grid_cols} does not tile a {rows}x{cols} image")]
    BadGrid {
        grid_rows: usize,
        grid_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("batch is empty")]
    EmptyBatch,

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("class {class} has {count} samples, at least 2 are needed to split")]
    TooFewSamples { class: usize, count: usize },

    #[error("label {label} out of range for {class_count} classes")]
    BadLabel { label: usize, class_count: usize },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("invalid parameters `{params}` for feature `{feature}`")]
    BadParams { feature: String, params: String },

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("spec: {0}")]
    Spec(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by reading or writing files (including
    /// malformed file contents).
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::DimensionMismatch { .. }
                | Error::BadMagic { .. }
                | Error::CountMismatch { .. }
                | Error::TruncatedFile(_)
                | Error::MissingFile { .. }
                | Error::ModelFormat(_)
        )
    }
}
