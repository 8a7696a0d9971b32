use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node {node} out of range for graph with {d} nodes")]
    NodeOutOfRange { node: usize, d: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(usize, usize),
    #[error("graph contains a directed cycle")]
    Cyclic,
    #[error("ordering is not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("matrix is numerically singular")]
    Singular,
    #[error("singular conditioning block")]
    SingularBlock,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("model has no edges")]
    NoEdges,
    #[error("empty data")]
    EmptyData,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("problem too large for exhaustive enumeration: d = {d}, limit {limit}")]
    TooLarge { d: usize, limit: usize },
}
