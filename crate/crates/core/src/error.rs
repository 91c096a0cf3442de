use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame size {width}x{height}")]
    FrameSize { width: u32, height: u32 },

    #[error("invalid bounding box [{x0},{y0},{x1},{y1})")]
    BoundingBox { x0: i64, y0: i64, x1: i64, y1: i64 },

    #[error("invalid mask: {0}")]
    Mask(String),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: String, actual: String },

    #[error("empty proposal")]
    EmptyProposal,

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("invalid superpixel map: {0}")]
    Superpixels(String),

    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),

    #[error("invalid selection instance: {0}")]
    Selection(String),

    #[error("instance too large for enumeration: n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("expansion requires metric pairwise: {0}")]
    NotMetric(String),

    #[error("gaussian mixture: {0}")]
    Gmm(String),

    #[error("no annotated frames to evaluate")]
    NoAnnotatedFrames,

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// True for errors caused by malformed or inconsistent input rather
    /// than a failure while computing.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Stage { .. } | Error::Gmm(_))
    }
}
