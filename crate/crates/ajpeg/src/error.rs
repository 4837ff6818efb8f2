use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {reason}")]
    BadImage { path: PathBuf, reason: String },
    #[error("{path}: corrupt stream: {source}")]
    Corrupt {
        path: PathBuf,
        #[source]
        source: ajpeg_core::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Codec(#[from] ajpeg_core::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn bad_image(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Self::BadImage {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// 2 usage, 3 IO (including unreadable images), 4 corrupt stream.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Io { .. } | Self::BadImage { .. } => 3,
            Self::Corrupt { .. } => 4,
            Self::Codec(ajpeg_core::Error::Format(_)) => 4,
            Self::Codec(_) => 2,
        }
    }
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;
