use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("distortion {0} outside (0, 1]")]
    DistortionOutOfRange(f64),

    #[error("feedback fraction {0} outside [0, 1]")]
    FractionOutOfRange(f64),

    #[error("codebook with {bits} bits is too large to enumerate (max {max})")]
    CodebookTooLarge { bits: u32, max: u32 },

    #[error("precoder expects {expected} precoding, got {found}")]
    WrongPrecoderKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("degenerate channel: {0}")]
    Degenerate(String),

    #[error("redraw cap of {cap} exceeded at trial {trial}: {reason}")]
    RedrawCapExceeded { cap: u32, trial: u64, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
