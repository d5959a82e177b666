//! Exact and edge-sampled 3-profiles of undirected graphs.
//!
//! The 3-profile of a graph counts its induced 3-vertex subgraphs by number of
//! edges: empty, single edge, wedge (path of length two) and triangle. This
//! crate computes it at three resolutions:
//!
//! * global: one 4-vector for the whole graph,
//! * local: per vertex, split by the role the vertex plays in each triple,
//! * ego: per center, the 3-profile of the subgraph induced by its neighbors.
//!
//! Counting runs as scatter/gather phases on a deterministic parallel
//! [`engine::Engine`]. [`sampling`] sparsifies the graph by Bernoulli edge
//! sampling and inverts the sampling process to get unbiased estimates;
//! [`theory`] evaluates the concentration conditions and indicator polynomials
//! behind that estimator. [`oracle`] holds brute-force references.

pub mod ego;
pub mod engine;
pub mod error;
pub mod generators;
pub mod graph;
pub mod local;
pub mod oracle;
pub mod profile;
pub mod sampling;
pub mod theory;

pub use engine::{Engine, PhaseStats};
pub use error::{Error, Result};
pub use graph::{load_edge_list, load_edge_list_with, EdgeRef, UndirectedGraph, VertexId};
pub use profile::{EstimatedProfile, ExactProfile, ProfileVector};
