use std::path::PathBuf;

use crate::overlay::PeerId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0} must be a non-empty term vector")]
    EmptyVector(&'static str),

    #[error("term {term} has invalid weight {weight} (weights must be finite and non-negative)")]
    InvalidWeight { term: u32, weight: f64 },

    #[error("unknown peer {0}")]
    UnknownPeer(PeerId),

    #[error("peer {0} cannot link to itself")]
    SelfLink(PeerId),

    #[error("peer {0} is the only peer in the network and has nobody to join")]
    NothingToJoin(PeerId),

    #[error("n_r must be at least 1")]
    ZeroResultsRequested,

    #[error(
        "random-graph APL is undefined for |V|={nodes}, |E|={edges} (needs |V| >= 2 and |E| > |V|)"
    )]
    AplBaselineUndefined { nodes: usize, edges: usize },

    #[error("random-graph CC is undefined for |V|={0} (needs |V| >= 2)")]
    CcBaselineUndefined(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
