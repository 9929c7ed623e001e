//! Multi-resolution binary tree (MRBT): a space-adaptive, incrementally
//! refined representation of discrete joint probability distributions.
//!
//! A dense probability table over k variables stores one value per joint
//! configuration and blows up exponentially (32 binary variables already
//! need 2^32 entries). The MRBT instead partitions the feature space into
//! axis-aligned regions of constant density, refining only where points
//! have been drawn: every inserted point either claims a fresh region or
//! triggers a chain of dichotomic splits until it is separated from the
//! point it collided with. Construction is anytime — each prefix of the
//! point stream leaves a valid, queryable approximation, and node/point/time
//! budgets can stop it early without corrupting anything.
//!
//! Supported queries: per-cell probability and region lookup in O(depth),
//! mass-proportional sampling in O(depth), constant-time access to the
//! maximum-density regions, and dense-table export for small spaces.
//!
//! The [`oracle`] module carries an independent brute-force implementation
//! of the same construction semantics plus the linear-scan CDF sampler used
//! as the dense baseline; equivalence against it is the correctness
//! backstop for the tree.

pub mod drawers;
pub mod error;
pub mod io;
pub mod oracle;
pub mod query;
pub mod space;
pub mod tree;

pub use error::{Error, Result};
pub use query::{RegionReport, DEFAULT_DENSE_CAP};
pub use space::{Point, Region, SpaceDescriptor};
pub use tree::{Budget, InsertOutcome, Leaf, StatsReport, Tree, WeightedPoint};
