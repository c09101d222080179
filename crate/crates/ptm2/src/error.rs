use std::io;
use std::path::PathBuf;

use ptm2_core::ScoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("{origin}:{line}: {source}")]
    Invalid {
        origin: String,
        line: usize,
        source: ptm2_core::Error,
    },

    #[error(transparent)]
    Core(#[from] ptm2_core::Error),

    #[error("score cache corrupted: lines {first} and {second} disagree on {key} ({a} vs {b})")]
    CacheConflict {
        key: String,
        first: usize,
        second: usize,
        a: f64,
        b: f64,
    },

    #[error("scorer unavailable: {0}")]
    ScorerUnavailable(String),

    #[error("ERRANT backend not included in this distribution")]
    ErrantUnsupported,

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 3 for the missing ERRANT backend, 4 when a scorer
    /// cannot produce a score, 1 for internal failures and 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        fn unavailable(e: &ScoreError) -> bool {
            matches!(e, ScoreError::Unavailable { .. } | ScoreError::CacheMiss { .. })
        }
        match self {
            Error::ErrantUnsupported => 3,
            Error::ScorerUnavailable(_) => 4,
            Error::Core(ptm2_core::Error::Score(e)) | Error::Core(ptm2_core::Error::Scoring { source: e, .. })
                if unavailable(e) =>
            {
                4
            }
            Error::Core(ptm2_core::Error::Reconstruction { .. }) => 1,
            _ => 2,
        }
    }
}
