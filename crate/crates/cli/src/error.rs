use privcount_core::Error as CoreError;

/// Failures mapped to process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration, dataset or arguments. Exit code 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// The run started and could not finish. Exit code 3.
    #[error("aborted: {0}")]
    Abort(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Abort(_) => 3,
        }
    }

    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn abort(e: impl std::fmt::Display) -> Self {
        CliError::Abort(e.to_string())
    }

    /// Core errors raised while a run is under way.
    pub fn runtime(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParams(_)
            | CoreError::SpecError(_)
            | CoreError::InvalidTruth { .. }
            | CoreError::OutOfGrid { .. }
            | CoreError::ParseError(_) => CliError::Config(e.to_string()),
            _ => CliError::Abort(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
