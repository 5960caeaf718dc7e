//! Error-to-exit-code policy: 2 for bad input or configuration, 3 for
//! structurally sound input whose semantics are broken (invalid or
//! unbounded models), 4 for certification counterexamples.

use ltv_core::{EvalError, ScenarioError, SolverError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable files, malformed JSON, bad flags or configs.
    #[error("{0}")]
    Input(String),
    /// The input parsed but means something unusable.
    #[error("{0}")]
    Semantic(String),
    /// Certification found a counterexample; the message is the report.
    #[error("{0}")]
    Certification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Semantic(_) => 3,
            CliError::Certification(_) => 4,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        // Both variants describe the model, not the invocation.
        CliError::Semantic(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::UnboundedLtv => CliError::Semantic(e.to_string()),
            EvalError::Solver(inner) => inner.into(),
            EvalError::InvalidPolicy { .. }
            | EvalError::TooManyPolicies { .. }
            | EvalError::ModeMismatch { .. } => CliError::Input(e.to_string()),
        }
    }
}
