//! Extremal graph constructions behind additive spanner lower bounds.
//!
//! The pipeline runs in four stages, each with an exhaustive audit:
//!
//! 1. [`avgfree`]: k-average-free integer sets from lattice shells.
//! 2. [`base`]: a layered graph whose designated pairs have unique,
//!    pairwise edge-disjoint shortest paths.
//! 3. [`compress`]: a two-coordinate product that keeps uniqueness while
//!    relaxing edge-disjointness to 2-path disjointness.
//! 4. [`obstacle`]: edge extension plus clique replacement, with one
//!    clique-edge certificate per pair.
//!
//! [`verify`] holds the adversary and incompressibility experiments,
//! [`spanners`] the baseline spanner algorithms, and [`pipeline`] the staged
//! orchestration with on-disk artifacts.

pub mod artifacts;
pub mod avgfree;
pub mod base;
pub mod compress;
pub mod error;
pub mod formats;
pub mod graph;
pub mod labels;
pub mod obstacle;
pub mod pairs;
mod par;
pub mod params;
pub mod pipeline;
pub mod shortest;
pub mod spanners;
pub mod verify;

pub use error::{AvgFreeError, ConstructionError, FormatError, GraphError, PipelineError, VerifyError};
pub use graph::{Edge, EdgeId, EdgeMask, Graph, NodeId, Path};
