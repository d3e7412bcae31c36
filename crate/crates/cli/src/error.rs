use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rhocover_core::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("verification failed: {}", .0.join(", "))]
    Verify(Vec<String>),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use rhocover_core::Error as E;
        match self {
            CliError::Core(err) => match err {
                E::Infeasible | E::Unbounded => exit::INFEASIBLE,
                E::DegenerateOccupancy { .. }
                | E::EmptyHistory
                | E::Domain(_)
                | E::Overflow { .. }
                | E::SolverStall { .. }
                | E::TooFewPoints { .. } => exit::NUMERICAL,
                E::Dimension { .. }
                | E::Validation(_)
                | E::NotErgodic(_)
                | E::Parameter(_)
                | E::ScheduleOverflow { .. }
                | E::ModelFile(_)
                | E::Io(_)
                | E::Json(_) => exit::VALIDATION,
            },
            CliError::Config(_) | CliError::Io { .. } | CliError::Json { .. } => exit::VALIDATION,
            CliError::Verify(names) => {
                if names.iter().any(|n| n == crate::verify::MODEL_CHECK) {
                    exit::VALIDATION
                } else {
                    exit::NUMERICAL
                }
            }
        }
    }
}

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
