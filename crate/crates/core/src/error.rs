use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({x}, {y}) lies outside the window")]
    PointOutsideWindow { x: f64, y: f64 },

    #[error("type index {index} out of range for {n_types} types")]
    TypeOutOfRange { index: usize, n_types: usize },

    #[error("field simulation failed: {0}")]
    FieldSimulation(String),

    #[error("conditional probability underflow for pair ({u}, {v}) at distance {r}")]
    ProbabilityUnderflow { u: usize, v: usize, r: f64 },

    #[error("first-order estimation failed: {0}")]
    FirstOrder(String),

    #[error("no bandwidth in the grid was usable")]
    NoUsableBandwidth,

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
