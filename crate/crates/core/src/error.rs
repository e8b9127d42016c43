use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape must have between 1 and 3 axes, got {0}")]
    UnsupportedRank(usize),
    #[error("shape is empty or has a zero-length axis")]
    EmptyShape,
    #[error("data length {len} does not match shape {shape:?}")]
    LengthMismatch { shape: Vec<usize>, len: usize },
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("non-binary value {1} at index {0}")]
    NonBinaryValue(usize, f64),
    #[error("value {1} at index {0} is outside [0, 1]")]
    OutOfRange(usize, f64),
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
    #[error("sigma must be positive and finite, got {0}")]
    NonPositiveSigma(f64),
    #[error("truncation must be positive and finite, got {0}")]
    NonPositiveTruncate(f64),
    #[error("noise amplitude must be non-negative, got {0}")]
    NegativeAmplitude(f64),
    #[error("noise length scale must be positive, got {0}")]
    NonPositiveLengthScale(f64),
    #[error("degenerate denominator: both inputs have zero mass")]
    DegenerateDenominator,
    #[error("marginal has zero mass")]
    EmptyMarginal,
    #[error("grid has {0} voxels, exhaustive search supports at most {1}")]
    TooLarge(usize, usize),
    #[error("phantom geometry out of bounds: {0}")]
    GeometryOutOfBounds(String),
    #[error("no voxel lies outside the boundary exclusion margin of {margin:?} voxels for shape {shape:?}")]
    InteriorEmpty { shape: Vec<usize>, margin: Vec<f64> },
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("npy: {0}")]
    Npy(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
