use thiserror::Error;

/// Failures of a subcommand, each mapped to its own exit code. Usage errors
/// are reported by the argument parser with code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("ingest error: {0}")]
    Ingest(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Ingest(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Runtime(_) => 5,
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}
