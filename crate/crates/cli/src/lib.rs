//! Command-line pipeline around the `curved-dirac` library: simulate flat
//! and curved wavepackets, verify the conformal transformation against the
//! direct curved-equation integrator, and render density heat maps.

pub mod config;
pub mod fig1;
pub mod output;
pub mod simulate;
pub mod svg;
pub mod verify;

use curved_dirac::dsl::DslError;
use curved_dirac::Error as CoreError;

/// Top-level CLI error split by exit code: configuration problems exit 2,
/// runtime/numerical failures exit 3. Verification failures are not errors;
/// they are reported and exit 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn tag(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Runtime(_) => "runtime",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidThroatRadius { .. }
            | CoreError::InvalidGrid { .. }
            | CoreError::InvalidPacket { .. }
            | CoreError::InvalidSolverConfig { .. }
            | CoreError::CflViolation { .. }
            | CoreError::NonPowerOfTwoGrid { .. }
            | CoreError::InsideThroat { .. }
            | CoreError::Dsl(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<DslError> for CliError {
    fn from(e: DslError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o failure: {e}"))
    }
}
