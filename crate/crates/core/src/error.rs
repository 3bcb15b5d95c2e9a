use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate edge between vertices {0} and {1}")]
    DuplicateEdge(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) has non-positive weight {2}")]
    NonPositiveWeight(usize, usize, f64),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("vertex {0} out of range (graph has {1} vertices)")]
    VertexOutOfRange(usize, usize),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate matrix entry at ({0}, {1})")]
    DuplicateEntry(usize, usize),
    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),
    #[error("assumption A1 violated: {0}")]
    AssumptionA1Violated(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("conjugate gradient stagnated after {iterations} iterations (relative residual {residual:e})")]
    CgStagnation { iterations: usize, residual: f64 },
    #[error("factorization failed: {0}")]
    FactorizationFailure(String),
    #[error("no s-t path among edges with |x| >= {0}")]
    NoPathAtThreshold(f64),
    #[error("cannot build connected simple graph with {n} vertices and {m} edges")]
    InfeasibleEdgeCount { n: usize, m: usize },
    #[error("image must be at least 2x2, got {0}x{1}")]
    ImageTooSmall(usize, usize),
    #[error("pixels {0:?} and {1:?} are not 8-neighbors")]
    NotNeighbors((usize, usize), (usize, usize)),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
