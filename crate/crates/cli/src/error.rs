use std::io;
use std::path::PathBuf;

use eventbasis::Error as CoreError;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Exit status: 0 ok, 1 usage or config, 2 data, 3 internal invariant.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Write { .. } => 1,
            CliError::Data(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Stage { source, .. } => source.exit_code(),
            CliError::Core(e) => match e {
                CoreError::InvalidQuery(_)
                | CoreError::InvalidDateRange { .. }
                | CoreError::InvalidWindow(_)
                | CoreError::InvalidTemplate(_)
                | CoreError::InvalidScale(_)
                | CoreError::EmptyGrid(_)
                | CoreError::EmptyLexicon
                | CoreError::InvalidLexiconEntry { .. }
                | CoreError::InvalidSeeds(_)
                | CoreError::InvalidSpec(_)
                | CoreError::Write { .. } => 1,
                CoreError::OutOfRange { .. } | CoreError::TemplateLength { .. } => 3,
                _ => 2,
            },
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        CliError::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
