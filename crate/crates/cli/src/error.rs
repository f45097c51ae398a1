use thiserror::Error;

/// Failures mapped to process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<mlgcp::Error> for CliError {
    fn from(e: mlgcp::Error) -> Self {
        use mlgcp::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidArgument(_) => CliError::Usage(msg),
            E::PointOutsideWindow { .. } | E::TypeOutOfRange { .. } | E::Parse { .. } | E::Io(_) | E::Csv(_) | E::Json(_) => {
                CliError::Io(msg)
            }
            E::FieldSimulation(_) | E::ProbabilityUnderflow { .. } | E::FirstOrder(_) | E::NoUsableBandwidth => {
                CliError::Numerical(msg)
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
