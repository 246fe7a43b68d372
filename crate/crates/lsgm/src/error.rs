//! Error taxonomy shared across the pipeline.
//!
//! Errors split into two families for process exit mapping: input problems
//! (bad parameters, unreadable or malformed files) and numerical problems
//! (rank deficits, non-convergence, NaN poisoning, degenerate geometry).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("embedding dimension {requested} exceeds the positive spectrum; retry with d <= {max_valid}")]
    EmbeddingRank { requested: usize, max_valid: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("alignment requires at least one seed pair")]
    SeedlessAlignment,
    #[error("cluster {cluster}: {source}")]
    Cluster {
        cluster: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub fn in_cluster(self, cluster: usize) -> Self {
        Error::Cluster {
            cluster,
            source: Box::new(self),
        }
    }

    /// Process exit code: 2 for input problems, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Param(_) | Error::Parse { .. } | Error::Io(_) => 2,
            Error::EmbeddingRank { .. }
            | Error::Numerical(_)
            | Error::Degenerate(_)
            | Error::SeedlessAlignment => 3,
            Error::Cluster { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
