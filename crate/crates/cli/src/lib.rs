//! Command-line front end for `tsvf-lab`.

pub mod args;
pub mod commands;
pub mod record;
pub mod schemas;

use std::fmt;

/// Failures, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, configuration, files or unknown names: exit 1.
    Usage(String),
    /// The post-selection cannot happen: exit 2.
    Impossible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Impossible(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Impossible(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<tsvf_lab::Error> for CliError {
    fn from(e: tsvf_lab::Error) -> Self {
        match e {
            tsvf_lab::Error::ImpossiblePostSelection { .. } => CliError::Impossible(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}
