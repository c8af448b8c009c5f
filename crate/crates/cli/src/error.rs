use qbi::inference::InferenceError;
use qbi::model_format::ParseError;
use qbi::oracle::OracleError;
use qbi::perturb::PerturbError;
use thiserror::Error;

/// Errors surfaced to the shell, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable or malformed files, unknown names, bad flags.
    #[error("{0}")]
    Input(String),
    /// The query itself has no answer (evidence of probability zero).
    #[error("{0}")]
    Inference(String),
    /// An internal invariant failed, e.g. the simulated state lost its norm.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Inference(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::ImpossibleEvidence => CliError::Inference(e.to_string()),
            InferenceError::NormViolation(_)
            | InferenceError::QubitMismatch { .. }
            | InferenceError::Malformed(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Query(q) => q.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<PerturbError> for CliError {
    fn from(e: PerturbError) -> Self {
        match e {
            PerturbError::Inference(q) => q.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Input(e.to_string())
    }
}
