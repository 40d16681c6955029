use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph contains a directed cycle")]
    Cycle,
    #[error("pattern is not realizable by any DAG")]
    NotRealizable,
    #[error("subset must contain at least two nodes")]
    SubsetTooSmall,
    #[error("node count {p} exceeds the limit of {max}")]
    TooManyNodes { p: usize, max: usize },
    #[error("inconsistent imset: {0}")]
    InconsistentImset(String),
    #[error("imsets differ in node count or storage mode")]
    ModeMismatch,
    #[error("arc {from} -> {to} is not present")]
    ArcAbsent { from: usize, to: usize },
    #[error("nodes {0} and {1} are already adjacent")]
    AlreadyAdjacent(usize, usize),
    #[error("singular covariance: node {node} is a linear function of {collinear:?}")]
    SingularCovariance { node: usize, collinear: Vec<usize> },
    #[error("sample size {n} too small for conditioning set of size {cond}")]
    SampleTooSmall { n: usize, cond: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
