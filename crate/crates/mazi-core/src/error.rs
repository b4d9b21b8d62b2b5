use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed line: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("node id {id} out of range (num_nodes = {num_nodes})")]
    NodeOutOfRange { id: usize, num_nodes: usize },

    #[error("negative edge weight {weight} on edge ({u}, {v})")]
    NegativeWeight { u: usize, v: usize, weight: f64 },

    #[error("length mismatch: expected {expected}, got {got} ({what})")]
    LengthMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("invalid community count k = {k} for graph with {num_nodes} nodes")]
    InvalidCommunityCount { k: usize, num_nodes: usize },

    #[error("graph has zero total weight")]
    ZeroTotalWeight,

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("non-finite value encountered during {0}")]
    NonFinite(String),

    #[error("invalid config: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
