use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the fitting library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite input: {0}")]
    NonFinite(f64),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("observation {value} lies outside the support {support}")]
    SupportViolation { value: f64, support: String },

    #[error("adaptive rejection sampling: {0}")]
    Ars(String),

    #[error("degenerate conditional: {0}")]
    Degenerate(String),

    #[error("goodness of fit undefined: {0}")]
    GofUndefined(String),

    #[error("sweep {iteration} failed at state {state}: {source}")]
    Kernel {
        iteration: usize,
        state: String,
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures caused by the input data or its validation rather
    /// than by a numerical breakdown.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::InvalidData(_) | Error::NonFinite(_) | Error::SupportViolation { .. } => true,
            Error::Kernel { source, .. } => source.is_data_error(),
            _ => false,
        }
    }
}
