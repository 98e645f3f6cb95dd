use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerically singular or degenerate configuration.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Inputs that violate an operation's contract (dimension or frequency mismatch).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Channel of a user is identically zero.
    #[error("degenerate channel for user {0}")]
    DegenerateChannel(usize),

    /// Stacked user channels are rank deficient.
    #[error("rank-deficient channel stack: users {first} and {second} are highly correlated (condition number {condition:.3e})")]
    RankDeficient {
        first: usize,
        second: usize,
        condition: f64,
    },

    /// Scenario configuration rejected by the schema.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True when the failure is numerical rather than a bad input file.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::DegenerateChannel(_) | Error::RankDeficient { .. }
        )
    }
}
