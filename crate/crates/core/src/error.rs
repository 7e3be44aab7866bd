use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("maxval {0} exceeds 255; only 8-bit rasters are supported")]
    MaxvalTooLarge(u32),

    #[error("truncated payload: expected {expected} samples, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid structuring element: {0}")]
    InvalidStructuringElement(&'static str),

    #[error("histogram has no mass")]
    EmptyHistogram,

    #[error("no asymmetry detected between image halves")]
    NoAsymmetry,

    #[error("image must be at least 2 columns wide, got {0}")]
    ImageTooNarrow(usize),

    #[error("region growing needs at least one seed")]
    NoSeeds,

    #[error("seed ({x}, {y}) lies outside the {width}x{height} image")]
    SeedOutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("two seeds share pixel ({x}, {y})")]
    DuplicateSeed { x: usize, y: usize },

    #[error("seed region id must be positive")]
    InvalidRegionId,

    #[error("watershed needs at least one positive marker")]
    NoMarkers,

    #[error("histogram has fewer than two occupied gray levels")]
    DegenerateHistogram,

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("ground-truth area is zero")]
    ZeroGroundTruthArea,
}
