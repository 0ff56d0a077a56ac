//! Command line front end around `tonestudy-core`: corpus ingestion, lexicon
//! calibration, tone and factor construction, market measures, event building
//! and the study report generator.

pub mod calendar_io;
pub mod calibrate_cmd;
pub mod classify;
pub mod config;
pub mod csvio;
pub mod dates;
pub mod doc;
pub mod events_cmd;
pub mod figures;
pub mod ingest;
pub mod market_cmd;
pub mod study_cmd;
pub mod synth;
pub mod tables;
pub mod tone_cmd;
pub mod verify_cmd;

use std::fmt;

/// Failure classes map directly onto process exit codes: bad or inconsistent
/// inputs exit 2, estimation failures (rank problems, too little data) exit 3.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Estimation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Estimation(_) => 3,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn estimation(msg: impl Into<String>) -> Self {
        CliError::Estimation(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Estimation(m) => write!(f, "estimation failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
