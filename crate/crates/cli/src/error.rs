use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config, flags or dataset.
    #[error("{0}")]
    Input(String),

    /// An output could not be written, or an earlier run's output is missing or unreadable.
    #[error("{0}")]
    Artifact(String),

    #[error(transparent)]
    Core(#[from] gsvp::Error),
}

impl CliError {
    pub fn artifact(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Artifact(format!("{}: {err}", path.display()))
    }

    /// 2 for input problems, 3 for artifacts, 4 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Artifact(_) => 3,
            CliError::Core(e) if e.is_solver_failure() => 4,
            CliError::Core(gsvp::Error::ExhaustedGrid { .. }) => 4,
            CliError::Core(gsvp::Error::ModelFormat { .. }) => 3,
            CliError::Core(_) => 2,
        }
    }
}
