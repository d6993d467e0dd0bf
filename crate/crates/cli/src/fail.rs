//! Two-class failure type driving the process exit code.

use std::fmt;

use satflux_core::CoreError;

/// Everything a subcommand can fail with. `Config` covers malformed or
/// inconsistent inputs (exit 2); `Validation` means the inputs were fine
/// but a check did not pass (exit 1).
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Validation(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Validation(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "config error: {msg}"),
            Failure::Validation(msg) => write!(f, "validation failure: {msg}"),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure::Config(e.to_string())
    }
}

/// IO errors carry the path they happened on.
pub fn io_fail(context: &str, path: &std::path::Path, e: std::io::Error) -> Failure {
    Failure::Config(format!("{context} {}: {e}", path.display()))
}
