use std::path::PathBuf;

use specdegen::airy::AiryError;
use specdegen::domains::DomainError;
use specdegen::forms::FormsError;
use specdegen::halfline::HalfLineError;
use specdegen::profile::ProfileError;
use specdegen::separation::SeparationError;
use thiserror::Error;

/// Failure of one CLI invocation, grouped by the exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: flags, config, values outside a module's domain.
    #[error("{0}")]
    Validation(String),
    /// A module declined to compute because the discretization cannot
    /// resolve the request.
    #[error("resolution refused: {0}")]
    Refusal(String),
    /// golden-check ran and found differences (or no golden file).
    #[error("{0}")]
    GoldenMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Refusal(_) => 3,
            Self::GoldenMismatch(_) => 1,
            Self::Io { .. } => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<AiryError> for CliError {
    fn from(e: AiryError) -> Self {
        match e {
            AiryError::ResidualTooLarge { .. } => Self::Refusal(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::Undersampled { .. } => Self::Refusal(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<HalfLineError> for CliError {
    fn from(e: HalfLineError) -> Self {
        match e {
            HalfLineError::NothingResolved { .. } | HalfLineError::NoBracket { .. } => {
                Self::Refusal(e.to_string())
            }
            HalfLineError::Airy(a) => a.into(),
            HalfLineError::Profile(p) => p.into(),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<SeparationError> for CliError {
    fn from(e: SeparationError) -> Self {
        match e {
            SeparationError::HalfLine { ell, source } => match CliError::from(source) {
                Self::Refusal(m) => Self::Refusal(format!("ℓ = {ell}: {m}")),
                other => Self::Validation(format!("ℓ = {ell}: {other}")),
            },
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<FormsError> for CliError {
    fn from(e: FormsError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        match e {
            DomainError::Underresolved { .. }
            | DomainError::NoConvergence(_)
            | DomainError::Factorization(_) => Self::Refusal(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}
