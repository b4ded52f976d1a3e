//! Performance functions, their l1 distances, and functional clustering.

mod cluster;
mod fit;
mod grid;
pub mod kmeans;

pub use cluster::{cluster, cluster_fixed_k, elbow_k, separated_count, within_cluster_diameter, ClusterSet};
pub use fit::{fit_perf_function, FunctionKind, PerfFunction};
pub use grid::{embed, l1_distance, l1_vectors, DistanceMatrix, Grid, MAX_GRID_POINTS};
