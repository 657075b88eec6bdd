use std::path::PathBuf;

use mvnn_core::Error as CoreError;
use thiserror::Error;

/// Process exit statuses.
///
/// | code | meaning |
/// |------|---------|
/// | 0 | success |
/// | 1 | internal failure (a bug) |
/// | 2 | invalid command line or configuration |
/// | 3 | malformed input data or model file |
/// | 4 | solver, training or size failure |
/// | 5 | file system error |
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const SOLVE: i32 = 4;
    pub const IO: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Parse { .. } | CliError::File { .. } => exit::DATA,
            CliError::Core { source, .. } => core_code(source),
            CliError::Io { .. } => exit::IO,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

fn core_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Config(_) | CoreError::Parameter(_) => exit::USAGE,
        CoreError::Data(_)
        | CoreError::LpParse { .. }
        | CoreError::Unprojected(_)
        | CoreError::Domain { .. }
        | CoreError::Dimension { .. }
        | CoreError::Infeasible { .. } => exit::DATA,
        CoreError::Bidder { source, .. } => core_code(source),
        _ => exit::SOLVE,
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches a context string to core errors.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Core {
            context: what(),
            source,
        })
    }
}
