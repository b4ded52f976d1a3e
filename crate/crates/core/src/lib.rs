//! Differential performance fuzzing.
//!
//! The crate discovers classes of inputs whose cost grows at different rates
//! with input size, models each class as a performance function, clusters
//! those functions while fuzzing, and explains the differences between
//! clusters with CART decision trees over input parameters and internal
//! execution counts.
//!
//! The pipeline is split into:
//!
//! * [`harness`]: the target contract, instrumented execution, the built-in
//!   micro-benchmarks and the `DPFUZZ1` trace format for external programs.
//! * [`fuzz`]: the multi-population evolutionary loop and the SlowFuzz /
//!   PerfFuzz baseline policies.
//! * [`model`]: function fitting, l1 distances and ε-bounded KMeans.
//! * [`explain`]: feature extraction and decision-tree discriminants.
//! * [`report`]: run bundles, metrics, tables and SVG plots.

#![forbid(unsafe_code)]

pub mod error;
pub mod explain;
pub mod fuzz;
pub mod harness;
pub mod model;
pub mod par;
pub mod report;

pub use error::{Error, Result};
