//! Round-synchronous simulation of the Congested Clique and CONGEST models,
//! together with bandwidth-restricted graph protocols that run on top of it:
//! a deterministic +1 girth approximation and partition-tree subgraph listing
//! in the clique, and randomized even-cycle / exact-girth detection in
//! CONGEST. Every protocol is checked against brute-force sequential oracles.

pub mod engine;
pub mod error;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod pattern;
pub mod rng;
pub mod turan;
pub mod witness;

pub mod clique;
pub mod congest;

pub use error::Fault;
pub use graph::Graph;
pub use pattern::{Instance, SubgraphPattern};
pub use witness::CycleWitness;
