//! Parallel peeling of r-uniform hypergraphs.
//!
//! Builds and samples random hypergraphs `H_r(n, c/n^(r-1))`, runs
//! round-synchronous peeling to the k-core, computes k-core emergence
//! thresholds and round-count coefficients, checks small-subgraph density
//! bounds by exhaustive enumeration, and drives seeded experiment sweeps.

pub mod density;
pub mod error;
pub mod experiments;
pub mod hypergraph;
pub mod io;
pub mod peeling;
pub mod random;
pub mod thresholds;

pub use error::{Error, Result};
pub use hypergraph::{EdgeId, Hypergraph, VertexId};
pub use peeling::{parallel_peel, sequential_kcore, PeelingTrace, RoundRecord};
pub use random::{sample_binomial_hypergraph, ModelParams};
