//! Density-adaptive elastic tree index over road networks, with continuous
//! k-nearest-neighbor queries over moving objects.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: the weighted road graph, DIMACS I/O, synthetic generators and
//!   Dijkstra primitives.
//! * [`partition`]: the static m-ary hierarchy of subgraphs with border
//!   vertices, external edges and per-leaf all-pairs distances.
//! * [`mpbs`]: multi-source bidirectional search, used to materialize
//!   shortcut weights when a node is activated for the first time.
//! * [`index`]: the elastic tree itself, with activation, live-vertex
//!   maintenance, folding and unfolding.
//! * [`knn`]: query preprocessing plus initial and incremental kNN search.
//! * [`sim`]: synthetic moving-object workloads.
//! * [`oracle`]: network-expansion and brute-force baselines.
//! * [`bench`]: the benchmark harness behind the `odin` binary.

pub mod bench;
pub mod error;
pub mod graph;
pub mod index;
pub mod knn;
pub mod mpbs;
pub mod oracle;
pub mod partition;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{Dist, RoadGraph, VertexId, Weight, INF};
pub use index::{IndexParams, ObjectId, ObjectMove, OdinIndex, Placement};
pub use knn::{KnnResult, Query, QueryState};
pub use partition::{NodeId, PartitionTree};
