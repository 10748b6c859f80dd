use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector or matrix dimensions do not agree.
    #[error("shape error: {0}")]
    Shape(String),

    /// The model cannot provide what was asked of it (e.g. no analytic mean for a statistic).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A model had no accepted rows to resample from.
    #[error("insufficient acceptance: model {model} has no accepted parameters")]
    InsufficientAcceptance { model: usize },

    /// A statistic failed on a sample; `statistic` names the failing spec.
    #[error("statistic `{statistic}` failed: {source}")]
    Statistic {
        statistic: String,
        #[source]
        source: Box<Error>,
    },

    /// A reference-table row could not be generated.
    #[error("reference table row {row} (model {model}): {source}")]
    Row {
        model: usize,
        row: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
