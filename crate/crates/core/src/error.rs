use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate scene: {0}")]
    DegenerateScene(String),

    #[error("signal too short: {len} samples, window needs {window}")]
    SignalTooShort { len: usize, window: usize },

    #[error("overlap-add denominator vanishes at interior sample {0}")]
    ColaViolated(usize),

    #[error("spectrogram is all zero")]
    AllZeroSpectrogram,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("reference signal is all zero")]
    ZeroReference,

    #[error("split bookkeeping mismatch: {0}")]
    Bookkeeping(String),

    #[error("file format: {0}")]
    Format(String),

    #[error("index {index} out of range ({len} records)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::Json(_) => 2,
            Error::Numeric(_) => 4,
            _ => 3,
        }
    }
}
