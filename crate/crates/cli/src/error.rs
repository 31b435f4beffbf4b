use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: String, reason: String },
    #[error("verification failed: {0} check(s) failed")]
    VerifyFailed(usize),
    #[error("{0} row(s) uncertified at the precision cap (--strict)")]
    StrictCap(usize),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn checkpoint(path: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Checkpoint { path: path.into(), reason: reason.into() }
    }

    /// 0 ok, 1 verification or computation failure, 2 usage, 3 I/O,
    /// 4 strict precision cap.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) | CliError::Compute(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Checkpoint { .. } => 3,
            CliError::StrictCap(_) => 4,
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

macro_rules! compute_err {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Compute(e.to_string())
            }
        })*
    };
}

compute_err!(
    gamma_criteria::criterion::CriterionError,
    gamma_criteria::analytic::AnalyticError,
    gamma_criteria::pade::PadeError,
    gamma_criteria::ball::BallError
);
