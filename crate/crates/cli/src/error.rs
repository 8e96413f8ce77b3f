use spikelab_core::Error as CoreError;

use crate::report::RunReport;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input files.
    Usage(String),
    /// A solver or statistic failed; carries whatever was computed before.
    Numerical { message: String, partial: Option<Box<RunReport>> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical { message: m, .. } => m,
        }
    }

    pub fn with_partial(self, report: RunReport) -> Self {
        match self {
            CliError::Numerical { message, .. } => CliError::Numerical {
                message,
                partial: Some(Box::new(report)),
            },
            other => other,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.message())
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Solver(_) | CoreError::Moments(_) | CoreError::Preprocessing(_) => CliError::Numerical {
                message: e.to_string(),
                partial: None,
            },
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
