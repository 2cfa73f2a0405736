use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("no equilibrium-valid support facet")]
    NoStablePose,

    #[error("no semantic parts shared between object and template")]
    SemanticUnavailable,

    #[error("principal frame is degenerate: {0}")]
    PcaDegenerate(String),

    #[error("no template registered for category `{0}`")]
    UnregisteredCategory(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: unsupported format ({reason})", path.display())]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("{}: label count {found} does not match point count {expected}", path.display())]
    LabelCountMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("annotation for `{object_id}` was made against a different candidate set")]
    StaleAnnotation { object_id: String },

    #[error("lease on `{object_id}` is not held by `{annotator_id}`")]
    StaleLease {
        object_id: String,
        annotator_id: String,
    },

    #[error("invalid decision: {0}")]
    InvalidDecision(String),

    #[error("upright scorer failed: {0}")]
    Scorer(String),

    #[error("export incomplete: {missing} object(s) neither selected nor discarded (first: `{first}`)")]
    ExportIncomplete { missing: usize, first: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
