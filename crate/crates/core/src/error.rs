use std::fmt;
use std::io;

/// Failure classes shared by every channel, collective and service.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ErrorKind {
    Timeout,
    PeerFailure,
    ChannelFailure,
    MessageTooLarge,
    ProtocolViolation,
    JoinFailed,
    RetriesExhausted,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::Timeout => "timeout",
            ErrorKind::PeerFailure => "peer failure",
            ErrorKind::ChannelFailure => "channel failure",
            ErrorKind::MessageTooLarge => "message too large",
            ErrorKind::ProtocolViolation => "protocol violation",
            ErrorKind::JoinFailed => "join failed",
            ErrorKind::RetriesExhausted => "retries exhausted",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind}: {detail}")]
pub struct FmiError {
    pub kind: ErrorKind,
    pub detail: String,
}

pub type Result<T, E = FmiError> = std::result::Result<T, E>;

impl FmiError {
    pub fn new(kind: ErrorKind, detail: impl Into<String>) -> Self {
        FmiError {
            kind,
            detail: detail.into(),
        }
    }

    pub fn timeout(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::Timeout, detail)
    }

    pub fn channel(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::ChannelFailure, detail)
    }

    pub fn protocol(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::ProtocolViolation, detail)
    }

    pub fn too_large(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::MessageTooLarge, detail)
    }

    pub fn kind(&self) -> ErrorKind {
        self.kind
    }

    /// Classifies an I/O error raised while talking to a peer or service.
    pub fn from_io(context: &str, err: io::Error) -> Self {
        match err.kind() {
            io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => {
                Self::timeout(format!("{context}: {err}"))
            }
            _ => Self::channel(format!("{context}: {err}")),
        }
    }
}
