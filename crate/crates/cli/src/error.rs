use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Core(#[from] irs_sop::Error),
    /// Some runs failed; their rows are in the output, marked as failures.
    #[error("{failed} of {total} runs failed, first: {first}")]
    Runs {
        failed: usize,
        total: usize,
        first: irs_sop::Error,
    },
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    /// Stable label printed as `error[<category>]`.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Parse { .. } => "parse",
            CliError::Io { .. } | CliError::Csv { .. } => "io",
            CliError::Core(e) | CliError::Runs { first: e, .. } => e.category(),
            CliError::Validation(_) => "validation",
        }
    }

    /// Process exit code; distinct per category family.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Io { .. } | CliError::Csv { .. } => 3,
            CliError::Core(_) => 4,
            CliError::Runs { .. } => 5,
            CliError::Validation(_) => 6,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<irs_sop::channel::ConfigError> for CliError {
    fn from(e: irs_sop::channel::ConfigError) -> Self {
        CliError::Core(e.into())
    }
}
