use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors from file formats, the registry, the wire protocol, and the
/// experiment harness.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("network: {0}")]
    Net(#[from] io::Error),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Core(#[from] sensorprint_core::Error),

    #[error("device '{device_id}' is already enrolled")]
    DuplicateDevice { device_id: String },

    #[error("corrupt fingerprint {path}: {reason}")]
    CorruptFingerprint { path: PathBuf, reason: String },

    #[error("device '{device_id}' is not enrolled")]
    UnknownDevice { device_id: String },

    #[error("invalid device id '{device_id}' (use 1-64 chars of [A-Za-z0-9._-])")]
    InvalidDeviceId { device_id: String },

    #[error("no capture for {frequency_hz} Hz (expected {path})")]
    MissingFrequency { frequency_hz: f64, path: PathBuf },

    #[error("wire frame: {reason}")]
    Frame { reason: String },

    #[error("unexpected message, expected {expected}")]
    UnexpectedMessage { expected: &'static str },

    #[error("remote error: {message}")]
    Remote { message: String },

    #[error("config: {reason}")]
    Config { reason: String },

    #[error("{reason}")]
    Invalid { reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// `true` when the id is safe for filenames, index lines, and wire frames.
pub fn valid_device_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'.' || b == b'_' || b == b'-')
}
