use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),
    #[error("accuracy failure in {context}: estimated relative error {estimate:.3e}")]
    AccuracyFailure { context: String, estimate: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
}

impl Error {
    /// Prefix the message with the operation that was running.
    pub fn context(self, what: &str) -> Self {
        match self {
            Error::AccuracyFailure { context, estimate } => Error::AccuracyFailure {
                context: format!("{what}: {context}"),
                estimate,
            },
            Error::Domain(m) => Error::Domain(format!("{what}: {m}")),
            Error::Range(m) => Error::Range(format!("{what}: {m}")),
            Error::UnsupportedParameters(m) => {
                Error::UnsupportedParameters(format!("{what}: {m}"))
            }
            Error::DegenerateParameters(m) => Error::DegenerateParameters(format!("{what}: {m}")),
            Error::InvalidParameter(m) => Error::InvalidParameter(format!("{what}: {m}")),
            Error::UnsupportedCombination(m) => {
                Error::UnsupportedCombination(format!("{what}: {m}"))
            }
            Error::ModelMismatch(m) => Error::ModelMismatch(format!("{what}: {m}")),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
