//! Target search on graphs with direction queries.
//!
//! The crate is organized bottom-up: [`graph`] (distances and cones),
//! [`potentials`] (Φ, Γ and median selection), [`oracles`] (query answerers),
//! [`adversaries`] (lower-bound responders with consistency certificates),
//! [`searchers`] (the detection algorithms) and [`harness`] (generators,
//! experiments, bound verification and serialization).

pub mod adversaries;
pub mod graph;
pub mod harness;
pub mod oracles;
pub mod potentials;
pub mod rng;
pub mod searchers;
pub mod vset;

pub use graph::{DistanceTable, Graph, GraphError, IndexedGraph, Vertex};
pub use vset::VertexSet;
