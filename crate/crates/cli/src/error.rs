use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] torus_tomo::Error),
    #[error("bad phantom parameters: {0}")]
    BadParams(String),
    #[error("object support radius {0} must be below 1/2")]
    GeometryViolation(f64),
    #[error("no Euclidean projection for direction {0}")]
    MissingAngle(String),
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    ConfigInvalid(Vec<String>),
    #[error("malformed sinogram csv: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
