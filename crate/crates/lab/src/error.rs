use std::path::PathBuf;

pub type LabResult<T> = Result<T, LabError>;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("the sweep grid is empty")]
    ExitEmptyGrid,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] lagflow_core::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use lagflow_core::Error as E;
        match self {
            LabError::InvalidSpec(_) | LabError::Config(_) | LabError::ExitEmptyGrid => EXIT_USAGE,
            LabError::Io { .. } => EXIT_NUMERIC,
            LabError::Core(e) => match e {
                E::InvalidConfig(_) | E::BadDimension | E::Parse { .. } | E::Io { .. } => EXIT_USAGE,
                _ => EXIT_NUMERIC,
            },
        }
    }
}
