//! Joint learning of node embeddings and multi-level community structure on
//! undirected graphs, plus the synthetic-benchmark generator and the
//! link-prediction / node-classification evaluation harness used to compare
//! against flat skip-gram baselines.

pub mod driver;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod graph;
pub mod hierarchy;
pub mod modularity;
pub mod rng;
pub mod synthgen;

pub use error::{Error, Result};
pub use graph::Graph;
pub use modularity::CommunityAssignment;
