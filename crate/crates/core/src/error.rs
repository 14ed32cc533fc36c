use thiserror::Error;

/// Errors produced by cpskit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation (e.g. `tau > 1`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition on the input data was violated (e.g. empty training data).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The operation requires scalar predictors.
    #[error("unsupported predictor dimension {dim}: scalar predictors required")]
    UnsupportedPredictor { dim: usize },

    /// A non-finite value was encountered where a finite one was required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A band failed its structural checks.
    #[error("invalid predictive band: {0}")]
    InvalidBand(String),

    /// An unknown or incompatible system, sampler or function was requested.
    #[error("configuration error: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
