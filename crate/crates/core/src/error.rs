use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical core and the scenario front end.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{what}: {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A distribution, family or indemnity failed its construction checks.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// A quadrature did not reach the requested tolerance.
    #[error("integration error bound {achieved:e} exceeds tolerance {requested:e}")]
    Accuracy { achieved: f64, requested: f64 },

    /// The bargaining-product oracle needs a strictly positive surplus.
    #[error("bargaining oracle needs a positive total gain, got {gain}")]
    OracleInapplicable { gain: f64 },

    /// Malformed family, distribution or scenario text.
    #[error("{field}: {message}")]
    Parse { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
