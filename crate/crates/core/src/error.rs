use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes and HTTP
/// statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Io,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed file: {0}")]
    MalformedFile(String),

    #[error("joint schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("non-finite value at frame {frame}, index {index}")]
    NonFiniteValue { frame: usize, index: usize },

    #[error("ragged rows: frame {frame} has length {found}, expected {expected}")]
    RaggedRows {
        frame: usize,
        found: usize,
        expected: usize,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("degenerate pose: {0}")]
    DegeneratePose(String),

    #[error("empty distance matrix")]
    EmptyMatrix,

    #[error("alignment path does not fit a {rows}x{cols} matrix: {reason}")]
    PathShapeMismatch { rows: usize, cols: usize, reason: String },

    #[error("empty signal")]
    EmptySignal,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("too few samples: {0} (need at least 2)")]
    TooFewSamples(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid warp: {0}")]
    InvalidWarp(String),

    #[error("invalid clip pair: {0}")]
    InvalidPair(String),

    #[error("report schema version mismatch: found {found:?}, expected {expected:?}")]
    SchemaVersionMismatch { found: String, expected: String },

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(
        "{stage}{}{}: {source}",
        file.as_ref().map(|p| format!(" [{}]", p.display())).unwrap_or_default(),
        frame.map(|f| format!(" [frame {f}]")).unwrap_or_default()
    )]
    Context {
        stage: &'static str,
        file: Option<PathBuf>,
        frame: Option<usize>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Context { source, .. } => source.kind(),
            Error::EmptyMatrix | Error::PathShapeMismatch { .. } => ErrorKind::Internal,
            _ => ErrorKind::Validation,
        }
    }

    /// Stable machine-readable code, e.g. `NON_FINITE_VALUE`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedFile(_) => "MALFORMED_FILE",
            Error::SchemaMismatch(_) => "SCHEMA_MISMATCH",
            Error::NonFiniteValue { .. } => "NON_FINITE_VALUE",
            Error::RaggedRows { .. } => "RAGGED_ROWS",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::DegeneratePose(_) => "DEGENERATE_POSE",
            Error::EmptyMatrix => "EMPTY_MATRIX",
            Error::PathShapeMismatch { .. } => "PATH_SHAPE_MISMATCH",
            Error::EmptySignal => "EMPTY_SIGNAL",
            Error::LengthMismatch { .. } => "LENGTH_MISMATCH",
            Error::TooFewSamples(_) => "TOO_FEW_SAMPLES",
            Error::InvalidParams(_) => "INVALID_PARAMS",
            Error::InvalidWarp(_) => "INVALID_WARP",
            Error::InvalidPair(_) => "INVALID_PAIR",
            Error::SchemaVersionMismatch { .. } => "SCHEMA_VERSION_MISMATCH",
            Error::Io { .. } => "IO_FAILURE",
            Error::Context { source, .. } => source.code(),
        }
    }

    /// Innermost error, skipping any [`Error::Context`] layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Context {
            stage,
            file: None,
            frame: None,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_file(self, stage: &'static str, file: &std::path::Path) -> Self {
        Error::Context {
            stage,
            file: Some(file.to_path_buf()),
            frame: None,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_frame(self, stage: &'static str, frame: usize) -> Self {
        Error::Context {
            stage,
            file: None,
            frame: Some(frame),
            source: Box::new(self),
        }
    }
}
