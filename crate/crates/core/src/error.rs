use thiserror::Error;

use crate::types::Modality;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series is already standardized")]
    AlreadyStandardized,

    #[error("series has no observations")]
    EmptySeries,

    #[error("observation channels {found:?} do not match model channels {expected:?}")]
    ChannelMismatch {
        expected: Vec<Modality>,
        found: Vec<Modality>,
    },

    #[error("numerical underflow: {0}")]
    NumericalUnderflow(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("state {state} collapsed and could not be re-seeded")]
    EmptyStateCollapse { state: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("parse error: {0}")]
    ParseError(String),

    #[error("non-contiguous time index: expected t = {expected}, found t = {found}")]
    NonContiguousIndex { expected: usize, found: usize },

    #[error("inconsistent channels at t = {t}: {detail}")]
    InconsistentChannels { t: usize, detail: String },

    #[error("non-finite value at t = {t} ({field})")]
    NonFiniteValue { t: usize, field: String },

    #[error("unsupported format version {found} (this build reads up to {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalUnderflow(_) | Error::EmptyStateCollapse { .. }
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::ParseError(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::ParseError(e.to_string())
    }
}
