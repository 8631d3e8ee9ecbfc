use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid predictor spec: intra id {0} is outside 0..=12")]
    InvalidSpec(u8),

    #[error("invalid base predictor function {0}, expected 1..=4")]
    InvalidPredictor(u8),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("pixel ({x}, {y}) lies outside a {width}x{height} frame")]
    OutOfBounds { x: usize, y: usize, width: usize, height: usize },

    #[error("invalid candidate: {0}")]
    InvalidCandidate(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("invalid frame record: {0}")]
    InvalidRecord(String),

    #[error("not a PCBZ container (magic {0:02x?})")]
    NotAContainer([u8; 4]),

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),

    #[error("corrupt header: {0}")]
    CorruptHeader(String),

    #[error("corrupt container at byte offset {offset}{}: {reason}", location(*.frame, *.block))]
    CorruptContainer { offset: u64, frame: Option<u32>, block: Option<u32>, reason: String },

    #[error("failed to decode block {index}: {source}")]
    BlockDecode {
        index: usize,
        #[source]
        source: io::Error,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("size mismatch: expected {expected} bytes, found {actual}")]
    SizeMismatch { expected: u64, actual: u64 },

    #[error(transparent)]
    Io(#[from] io::Error),
}

fn location(frame: Option<u32>, block: Option<u32>) -> String {
    match (frame, block) {
        (Some(f), Some(b)) => format!(" (frame {f}, block {b})"),
        (Some(f), None) => format!(" (frame {f})"),
        _ => String::new(),
    }
}

impl Error {
    /// True for errors that mean the input bytes are damaged, as opposed to
    /// being the wrong kind of file or a failing device.
    pub fn is_corruption(&self) -> bool {
        matches!(
            self,
            Error::CorruptHeader(_)
                | Error::CorruptContainer { .. }
                | Error::BlockDecode { .. }
                | Error::InvalidRecord(_)
        )
    }
}
