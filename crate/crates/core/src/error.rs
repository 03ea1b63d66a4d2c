use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input outside the domain of the operation (non-positive frequency,
    /// empty array, tones outside a spectrum, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A least-squares segment with too few samples to be determined.
    #[error("segment {index} ({r_min} m to {r_max} m) has {count} sample(s), need at least 2")]
    Underdetermined {
        index: usize,
        r_min: f64,
        r_max: f64,
        count: usize,
    },

    /// Malformed input file. `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: msg.into(),
    })
}
