use std::io;
use std::path::PathBuf;

use diana_core::{MetricsError, SimError, ValidationErrors};
use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_SIMULATION: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", invalid_message(.variant.as_deref(), .errors))]
    Invalid {
        variant: Option<String>,
        errors: ValidationErrors,
    },
    #[error("{}simulation failed: {source}", prefix(.variant.as_deref()))]
    Simulation {
        variant: Option<String>,
        #[source]
        source: SimError,
    },
    #[error("{}metrics failed: {source}", prefix(.variant.as_deref()))]
    Metrics {
        variant: Option<String>,
        #[source]
        source: MetricsError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{} already exists (pass --overwrite to replace it)", path.display())]
    Exists { path: PathBuf },
}

fn prefix(variant: Option<&str>) -> String {
    variant.map(|v| format!("variant {v}: ")).unwrap_or_default()
}

fn invalid_message(variant: Option<&str>, errors: &ValidationErrors) -> String {
    let p = prefix(variant);
    errors.0.iter().map(|v| format!("{p}{v}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse { .. } | CliError::Invalid { .. } => EXIT_VALIDATION,
            CliError::Simulation {
                source: SimError::Invalid(_),
                ..
            } => EXIT_VALIDATION,
            CliError::Simulation { .. } | CliError::Metrics { .. } => EXIT_SIMULATION,
            CliError::Io { .. } | CliError::Exists { .. } => EXIT_IO,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
