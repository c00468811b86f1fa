use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("transfer function has a pole on the unit circle at omega = {omega}")]
    PoleOnCircle { omega: f64 },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("node index {node} out of range 1..={node_count}")]
    NodeOutOfRange { node: usize, node_count: usize },

    #[error("self-loop on node {0}: the network matrix has a zero diagonal")]
    SelfLoop(usize),

    #[error("network is not well-posed: I - D0 is singular (condition {condition:e})")]
    IllPosed { condition: f64 },

    #[error("simulation diverged: first non-finite value at node {node}, sample {sample}")]
    SimulationDiverged { node: usize, sample: usize },

    #[error("I - G(e^jw) is singular at omega = {omega}")]
    SingularAtFrequency { omega: f64 },

    #[error("invalid excitation: {0}")]
    InvalidExcitation(String),

    #[error("insufficient samples: need more than {needed}, record has {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("invalid model structure: {0}")]
    InvalidStructure(String),

    #[error("column node {0} is not excited in the record")]
    UnexcitedNode(usize),

    #[error("rank-deficient regression ({rows}x{cols}, numerical rank {rank})")]
    RankDeficient { rows: usize, cols: usize, rank: usize },

    #[error("edge {j} <- {i} is not in the local topology")]
    EdgeNotInTopology { j: usize, i: usize },

    #[error("{dropped} of {total} grid points dropped as ill-conditioned")]
    TooManyDroppedPoints { dropped: usize, total: usize },

    #[error("underdetermined fit: {points} grid points for {params} parameters")]
    Underdetermined { points: usize, params: usize },

    #[error("missing entry T[{row},{col}] in the submatrix estimate")]
    MissingEntry { row: usize, col: usize },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    /// `inner` is shown in the message rather than chained as a source, so
    /// reports print it once.
    #[error("{stage}: {inner}")]
    Stage { stage: &'static str, inner: Box<Error> },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, inner: Box::new(self) }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
