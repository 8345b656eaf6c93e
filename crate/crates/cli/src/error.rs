use std::fmt;

use mint_core::MintError;

/// Process exit codes. These values are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    /// Unreadable or malformed input, or an unwritable output path.
    Parse = 2,
    /// The estimator rejected the data (duplicates, k too large, ...).
    Estimator = 3,
    /// Invalid or inconsistent command-line arguments.
    Arguments = 4,
    SingularDesign = 5,
    DegenerateResiduals = 6,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Parse, message)
    }

    pub fn args(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Arguments, message)
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<MintError> for CliError {
    fn from(e: MintError) -> Self {
        let kind = match &e {
            MintError::InvalidInput(_) | MintError::SamplerDimensionMismatch { .. } => ExitKind::Arguments,
            MintError::NonFinite { .. } => ExitKind::Parse,
            MintError::DuplicatePoints(_)
            | MintError::KTooLarge { .. }
            | MintError::DomainError(_)
            | MintError::InfeasibleSupport { .. }
            | MintError::IllConditioned(_) => ExitKind::Estimator,
            MintError::SingularDesign(_) => ExitKind::SingularDesign,
            MintError::DegenerateResiduals => ExitKind::DegenerateResiduals,
        };
        CliError::new(kind, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
