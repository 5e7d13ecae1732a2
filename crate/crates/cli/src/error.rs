use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] dtqw_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use dtqw_core::Error as E;
        match self {
            CliError::Config(_) | CliError::UnknownPreset { .. } => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                E::NoConvergence { .. }
                | E::TailTooLarge { .. }
                | E::Anticommutation { .. }
                | E::NotNormalized { .. } => 3,
                E::Io(_) => 1,
                _ => 2,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
