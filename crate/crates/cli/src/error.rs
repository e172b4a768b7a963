use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: hazbands::Error },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error(transparent)]
    Core(#[from] hazbands::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// 1 for I/O and unreadable input, 2 for configuration, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::File { source, .. } | CliError::Core(source) => core_code(source),
        }
    }
}

fn core_code(e: &hazbands::Error) -> i32 {
    use hazbands::Error::*;
    match e {
        Io(_) | Csv(_) | Json(_) | EmptyData | MalformedRow(..) => 1,
        InvalidParameter(_) | InvalidConfig(_) | DegenerateSample(_) | OutOfDomain(_) | BadShape(_) | TooLarge(_)
        | ShapeMismatch(_) => 2,
        DomainError(_) | NoEvents | InsufficientDraws { .. } | IntegrandSingular(_) | NoFiniteMedian => 3,
        Replicate { source, .. } => core_code(source),
    }
}
