use std::path::PathBuf;

use crate::nn::train::EpochRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameter `{field}` = {value} outside [{min}, {max}]")]
    Range {
        field: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in layer {layer}: {detail}")]
    Numeric { layer: usize, detail: String },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("unsupported schema version {found} (this build reads up to {supported})")]
    Version { found: u32, supported: u32 },

    #[error("file truncated: needed {needed} bytes, {available} available")]
    Truncated { needed: usize, available: usize },

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("training diverged at epoch {epoch}")]
    Diverged {
        epoch: usize,
        history: Vec<EpochRecord>,
    },

    #[error("design {index}: {source}")]
    Design {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Stable machine-readable tag used in CLI error reports and FFI codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Range { .. } => "range",
            Error::Config(_) => "config",
            Error::Shape { .. } => "shape",
            Error::Numeric { .. } => "numeric",
            Error::Format(_) => "format",
            Error::Version { .. } => "version",
            Error::Truncated { .. } => "truncated",
            Error::Checksum { .. } => "checksum",
            Error::Diverged { .. } => "diverged",
            Error::Design { source, .. } => source.kind(),
            Error::MissingFile(_) => "missing_file",
            Error::Json(_) => "format",
            Error::Io(_) => "io",
        }
    }
}
