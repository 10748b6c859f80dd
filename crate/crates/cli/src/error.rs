use std::fmt;

/// Errors surfaced by the harness. Config errors exit with status 2,
/// everything else with 3.
#[derive(Debug)]
pub enum CliError {
    Config { path: String, message: String },
    Core(abcmc_core::Error),
    Io(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { path: path.into(), message: message.into() }
    }

    pub fn io(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { path, message } => write!(f, "config error at `{path}`: {message}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<abcmc_core::Error> for CliError {
    fn from(e: abcmc_core::Error) -> Self {
        CliError::Core(e)
    }
}
