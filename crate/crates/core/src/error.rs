use alloc::string::String;

/// Errors raised by model construction, coordinate maps and integration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("field length mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("singular map: {0}")]
    Singular(String),
    #[error("value outside domain: {0}")]
    Domain(String),
    #[error("operation not available for this model: {0}")]
    Misuse(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("integration blew up at t = {t}")]
    BlowUp { t: f64 },
    #[error("initial state is not hyperbolic at cell {cell}")]
    NotHyperbolic { cell: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
