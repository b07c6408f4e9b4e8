//! Error type shared across the pipeline.

use std::path::PathBuf;

/// Errors produced by catalog loading, scene synthesis, and the CLI.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("dimension mismatch: {expected} vs {actual} in {context}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("degenerate raster size {width}x{height} in {context}")]
    DegenerateSize {
        context: &'static str,
        width: i64,
        height: i64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty asset catalog (need at least one background and one foreground)")]
    EmptyCatalog,

    #[error("foreground mask is empty after scaling; object rejected")]
    DegenerateMask,

    #[error("no object could be placed in the scene")]
    UnplaceableScene,

    #[error("sample index {index} out of range (count {count})")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("missing input: {0}")]
    MissingInput(PathBuf),

    #[error("image {path}: {source}")]
    Image {
        path: PathBuf,
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
