//! Library side of the `qbm` command: run configuration, the four
//! subcommands and their exit-code contract.

use std::fmt;
use std::process::ExitCode;

pub mod commands;
pub mod config;
pub mod selfcheck;

pub use commands::{cmd_asymptote, cmd_compute, cmd_validate};
pub use config::{RunConfig, OVERRIDE_KEYS};
pub use selfcheck::cmd_selfcheck;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    /// Config parse or validation failure, unreadable input, unwritable output.
    Usage = 1,
    /// At least one grid point failed to converge.
    NonConvergence = 2,
    /// The model failed the positive-real check.
    ValidationFailed = 3,
    /// Fitted long-time slope outside tolerance.
    SlopeMismatch = 4,
    /// A self-check identity failed.
    SelfcheckFailed = 5,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e.code())
    }
}

/// A command that stopped early, with the diagnostic to print.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            exit: Exit::Usage,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("i/o error: {e}"))
    }
}

pub type Outcome = Result<Exit, Failure>;
