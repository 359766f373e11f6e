use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SeldError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SeldError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("decode error at frame {frame}: {message}")]
    Decode { frame: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl SeldError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SeldError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        SeldError::Parse {
            line,
            message: message.into(),
        }
    }
}
