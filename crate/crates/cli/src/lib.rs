//! Front ends for the VTMS simulator: batch runs, the self-test, and the
//! live HTTP service.

pub mod run;
pub mod selftest;
pub mod server;

use thiserror::Error;
use vtms_core::harness::{HarnessError, ScenarioError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => EXIT_VALIDATION,
            CliError::Invariant(_) => EXIT_INVARIANT,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Scenario(e) => e.into(),
            HarnessError::Io(e) => CliError::Io(e.to_string()),
            e @ (HarnessError::Controller(_) | HarnessError::Invariant { .. }) => {
                CliError::Invariant(e.to_string())
            }
        }
    }
}
