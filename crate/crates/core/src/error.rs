use thiserror::Error;

use crate::graph::{Edge, NodeId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {node} out of range for a graph on {node_count} nodes")]
    NodeOutOfRange { node: u64, node_count: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}")]
    DuplicateEdge(Edge),
    #[error("edge {0} is not present in the graph")]
    MissingEdge(Edge),
    #[error("path step {from} -> {to} is not an edge")]
    BrokenPath { from: NodeId, to: NodeId },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AvgFreeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("coordinate {value} at position {index} outside [1, {p}]")]
    CoordinateOutOfRange { index: usize, value: u64, p: u64 },
    #[error("exhaustive verification needs {required} tuples, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
}

/// Failures while building one of the construction stages.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("degenerate parameter: {0}")]
    Degenerate(String),
    #[error("edge {edge} lies on the canonical paths of pairs {first} and {second}")]
    SharedEdge { edge: Edge, first: usize, second: usize },
    #[error("host pair {pair} is at distance {found:?}, expected {expected}")]
    HostDistance { pair: usize, found: Option<u32>, expected: u32 },
    #[error("host pair {pair} has a canonical path of length {found}, expected {expected}")]
    HostPathLength { pair: usize, found: usize, expected: u32 },
    #[error("refusing to build {what}: {nodes} nodes exceeds the ceiling of {ceiling}")]
    TooLarge { what: &'static str, nodes: u128, ceiling: u128 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("json error in {file}: {source}")]
    Json {
        file: String,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl FormatError {
    pub(crate) fn parse(file: &str, line: usize, message: impl Into<String>) -> Self {
        FormatError::Parse { file: file.to_string(), line, message: message.into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("compressor emits {bits} bits, over the budget of {budget}")]
    OverBudget { bits: u32, budget: u32 },
    #[error("family of 2^{pairs} members is too large to enumerate")]
    FamilyTooLarge { pairs: usize },
    #[error("inconclusive: no collision among {searched} family members")]
    Inconclusive { searched: u64 },
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    AvgFree(#[from] AvgFreeError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("{stage} audit failed: {report}")]
    AuditFailed { stage: String, report: serde_json::Value },
    #[error(transparent)]
    Format(#[from] FormatError),
}
