use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The matrix no longer sums to one, so skill estimates are meaningless.
    #[error("knowledge matrix total mass is {total}, expected 1.0")]
    DegenerateMass { total: f64 },

    #[error("no task cell has a positive sampling weight")]
    EmptySupport,

    #[error("cell (topic {topic}, level {level}) is outside the 8x10 grid")]
    CellOutOfBounds { topic: usize, level: usize },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("baseline label `{0}` does not name any aggregate")]
    UnknownBaseline(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: impl ToString, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            reason,
        }
    }
}
