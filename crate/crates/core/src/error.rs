use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero vector has no primitive representative")]
    ZeroVector,
    #[error("rows have rank {found}, expected {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error("invalid dimensions: {0}")]
    InvalidDimension(String),
    #[error("grid size {grid} cannot resolve band {band} (need grid >= 2*band + 2)")]
    BandTooLarge { grid: usize, band: i64 },
    #[error("frequency {0} lies outside the band")]
    OutOfBand(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("weight has no value at frequency {frequency} on subspace {subspace}")]
    WeightUndefined { frequency: String, subspace: String },
    #[error("weight is degenerate: W_k = 0 at k = {0}")]
    DegenerateWeight(String),
    #[error("unsupported weight: {0}")]
    UnsupportedWeight(String),
    #[error("quadrature with {steps} steps is too coarse (need more than {required})")]
    QuadratureTooCoarse { steps: usize, required: usize },
    #[error("frequency {0} has no usable axis for slice reconstruction")]
    AxisDegenerate(String),
    #[error("direction {direction} is not orthogonal to frequency {frequency}")]
    NotOrthogonal { direction: String, frequency: String },
    #[error("normal multiplier vanishes at k = {0}")]
    SingularFilter(String),
    #[error("sinogram mean {mean:e} exceeds tolerance {tolerance:e}")]
    NonzeroMean { mean: f64, tolerance: f64 },
    #[error("no hyperplane orthogonal to k = {0} in the family")]
    IncompleteCover(String),
    #[error("parameter violation: {0}")]
    ParamViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
