//! Error-to-exit-code mapping.
//!
//! Exit 2 marks anything the user can fix in the configuration (bad keys,
//! malformed values, unreadable files, windows the physics cannot satisfy —
//! the core reports those as input errors).  Exit 3 marks a numerical
//! failure inside a run (non-convergence, eigensolver trouble, output I/O).

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(feshlab_core::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(feshlab_core::Error::Input(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "output error: {e}"),
        }
    }
}

impl From<feshlab_core::Error> for CliError {
    fn from(e: feshlab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
