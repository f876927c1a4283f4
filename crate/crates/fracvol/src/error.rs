use thiserror::Error;

/// Failure classes of the command-line tool, each with its exit code.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Config(_) => 3,
            AppError::Compute(_) => 4,
        }
    }
}

impl From<fracvol_core::Error> for AppError {
    fn from(e: fracvol_core::Error) -> Self {
        use fracvol_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::Domain(_) | E::Grid(_) | E::Data(_) | E::MissingHistory { .. } => {
                AppError::Config(e.to_string())
            }
            _ => AppError::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Config(e.to_string())
    }
}

pub type AppResult<T> = Result<T, AppError>;
