use thiserror::Error;

use crate::config::Diagnostic;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", format_diagnostics(.0))]
    Config(Vec<Diagnostic>),

    #[error("numerical failure: {0}")]
    Numerical(#[from] protective_core::Error),

    #[error("i/o error: {0}")]
    Io(String),
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter()
        .map(|x| format!("  {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
