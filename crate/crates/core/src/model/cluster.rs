use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_best, kmeans_restarts, settle, KMeansOutcome};
use super::{embed, l1_vectors, DistanceMatrix, Grid, PerfFunction};
use crate::harness::PathId;
use crate::{par, Error, Result};

/// A partition of modeled paths into performance clusters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub k: usize,
    pub assignment: BTreeMap<PathId, usize>,
    /// Per-cluster median evaluation vectors on `grid`.
    pub centroids: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub separated_count: usize,
    pub grid: Grid,
}

impl ClusterSet {
    pub fn empty(grid: Grid) -> Self {
        ClusterSet { k: 0, assignment: BTreeMap::new(), centroids: Vec::new(), epsilon: 0.0, separated_count: 0, grid }
    }

    pub fn label(&self, path: &PathId) -> Option<usize> {
        self.assignment.get(path).copied()
    }

    /// Paths of each cluster, in path order.
    pub fn members(&self) -> Vec<Vec<PathId>> {
        let mut out = vec![Vec::new(); self.k];
        for (p, c) in &self.assignment {
            out[*c].push(*p);
        }
        out
    }
}

/// Largest pairwise distance inside any cluster.
pub fn within_cluster_diameter(dm: &DistanceMatrix, assignment: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..assignment.len() {
        for j in (i + 1)..assignment.len() {
            if assignment[i] == assignment[j] {
                worst = worst.max(dm.get(i, j));
            }
        }
    }
    worst
}

/// Size of a greedily built set of functions pairwise farther than ε apart.
/// No ε-feasible partition can have fewer clusters.
fn far_clique_bound(dm: &DistanceMatrix, epsilon: f64) -> usize {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..dm.n {
        if chosen.iter().all(|&j| dm.get(i, j) > epsilon) {
            chosen.push(i);
        }
    }
    chosen.len().max(1)
}

/// Relabels clusters by ascending centroid mass (cluster 0 is the cheapest).
fn build(functions: &[PerfFunction], o: KMeansOutcome, epsilon: f64, grid: Grid) -> ClusterSet {
    let k = o.centroids.len();
    let mut order: Vec<usize> = (0..k).collect();
    let mass: Vec<f64> = o.centroids.iter().map(|c| c.iter().sum()).collect();
    order.sort_by(|a, b| mass[*a].total_cmp(&mass[*b]).then(a.cmp(b)));
    let mut relabel = vec![0; k];
    for (new, old) in order.iter().enumerate() {
        relabel[*old] = new;
    }
    let assignment = functions
        .iter()
        .zip(&o.assignment)
        .map(|(f, c)| (f.path, relabel[*c]))
        .collect();
    let centroids = order.iter().map(|old| o.centroids[*old].clone()).collect();
    let mut set = ClusterSet { k, assignment, centroids, epsilon, separated_count: 0, grid };
    set.separated_count = separated_count(&set, 4.0 * epsilon);
    set
}

/// Widest gap between the bounds that is still scanned one k at a time.
const LINEAR_SCAN: usize = 8;

/// Complete-linkage greedy partition: each function joins the first cluster
/// whose members are all within ε of it, else opens a new one.
fn greedy_partition(dm: &DistanceMatrix, epsilon: f64) -> (Vec<usize>, usize) {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut assignment = vec![0; dm.n];
    for i in 0..dm.n {
        match groups.iter().position(|g| g.iter().all(|&j| dm.get(i, j) <= epsilon)) {
            Some(c) => {
                groups[c].push(i);
                assignment[i] = c;
            }
            None => {
                assignment[i] = groups.len();
                groups.push(vec![i]);
            }
        }
    }
    (assignment, groups.len())
}

/// The cheapest ε-feasible restart for `k`, if any.
fn feasible_kmeans(points: &[Vec<f64>], dm: &DistanceMatrix, k: usize, epsilon: f64, seed: u64) -> Option<KMeansOutcome> {
    kmeans_restarts(points, k, seed)
        .into_iter()
        .filter(|o| within_cluster_diameter(dm, &o.assignment) <= epsilon)
        .fold(None, |best: Option<KMeansOutcome>, o| match best {
            Some(b) if b.cost <= o.cost => Some(b),
            _ => Some(o),
        })
}

/// Clusters functions so that every within-cluster pair is at most ε apart.
///
/// The cluster count is searched between two bounds: a set of functions
/// pairwise farther than ε apart (no partition can use fewer clusters) and a
/// greedy complete-linkage partition (which is feasible). Inside that range
/// KMeans runs with increasing k, or by bisection when the range is wide, and
/// the cheapest ε-feasible restart at the smallest successful k wins. If
/// KMeans succeeds nowhere below the upper bound, the greedy partition is
/// returned.
pub fn cluster(functions: &[PerfFunction], epsilon: f64, grid: Grid, seed: u64) -> Result<ClusterSet> {
    if functions.is_empty() {
        return Err(Error::Empty("no performance functions to cluster"));
    }
    let points = par::map(functions, |f| embed(f, &grid));
    let dm = DistanceMatrix::from_vectors(&points, grid);
    let lower = far_clique_bound(&dm, epsilon);
    let (greedy, upper) = greedy_partition(&dm, epsilon);
    let mut found = None;
    if upper - lower <= LINEAR_SCAN {
        found = (lower..upper).find_map(|k| feasible_kmeans(&points, &dm, k, epsilon, seed));
    } else {
        let (mut lo, mut hi) = (lower, upper);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            match feasible_kmeans(&points, &dm, mid, epsilon, seed) {
                Some(o) => {
                    found = Some(o);
                    hi = mid;
                }
                None => lo = mid + 1,
            }
        }
    }
    let o = found.unwrap_or_else(|| settle(&points, greedy, upper));
    Ok(build(functions, o, epsilon, grid))
}

/// KMeans with a fixed cluster count (clamped to `1..=functions.len()`).
/// The recorded ε is the largest within-cluster distance actually attained.
pub fn cluster_fixed_k(functions: &[PerfFunction], k: usize, grid: Grid, seed: u64) -> Result<ClusterSet> {
    if functions.is_empty() {
        return Err(Error::Empty("no performance functions to cluster"));
    }
    let points = par::map(functions, |f| embed(f, &grid));
    let dm = DistanceMatrix::from_vectors(&points, grid);
    let o = kmeans_best(&points, k.clamp(1, functions.len()), seed);
    let eps = within_cluster_diameter(&dm, &o.assignment);
    Ok(build(functions, o, eps, grid))
}

/// Number of clusters whose centroid is farther than ς from every other
/// centroid. A single cluster counts as separated.
pub fn separated_count(clusters: &ClusterSet, sigma: f64) -> usize {
    let c = &clusters.centroids;
    (0..c.len())
        .filter(|&i| (0..c.len()).all(|j| i == j || l1_vectors(&c[i], &c[j], clusters.grid.step) > sigma))
        .count()
}

/// Smallest k whose total l1 distance from functions to their cluster
/// centroids is below `threshold`.
///
/// Small sets are scanned k = 1, 2, …; larger ones double k until the error
/// drops below the threshold and then bisect, which assumes the error falls
/// as k grows.
pub fn elbow_k(functions: &[PerfFunction], threshold: f64, grid: Grid, seed: u64) -> Result<usize> {
    if functions.is_empty() {
        return Err(Error::Empty("no performance functions for the elbow rule"));
    }
    let points = par::map(functions, |f| embed(f, &grid));
    let m = functions.len();
    let below = |k: usize| kmeans_best(&points, k, seed).cost * (grid.step as f64) < threshold;
    if m <= 2 * LINEAR_SCAN {
        return Ok((1..=m).find(|&k| below(k)).unwrap_or(m));
    }
    let mut lo = 1;
    let mut hi = 1;
    while !below(hi) {
        if hi == m {
            return Ok(m);
        }
        lo = hi + 1;
        hi = (hi * 2).min(m);
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if below(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FunctionKind;

    fn f(path: u64, kind: FunctionKind, a: f64, b: f64) -> PerfFunction {
        PerfFunction { path: PathId(path), kind, a, b, n_min: 1, n_max: 20, residual: 0.0, sample_count: 3 }
    }

    fn lin(path: u64, a: f64, b: f64) -> PerfFunction {
        f(path, FunctionKind::Linear, a, b)
    }

    #[test]
    fn identical_functions_form_one_cluster() {
        let fs: Vec<_> = (0..5).map(|i| lin(i, 2.0, 1.0)).collect();
        let c = cluster(&fs, 0.5, Grid::new(1, 20, 1), 1).unwrap();
        assert_eq!(c.k, 1);
        assert_eq!(c.separated_count, 1);
    }

    #[test]
    fn linear_pair_and_square() {
        let fs = vec![lin(1, 1.0, 1.0), lin(2, 1.0, 2.0), f(3, FunctionKind::PowerLaw, 1.0, 2.0)];
        let c = cluster(&fs, 25.0, Grid::new(1, 20, 1), 7).unwrap();
        assert_eq!(c.k, 2);
        assert_eq!(c.label(&PathId(1)), c.label(&PathId(2)));
        assert_ne!(c.label(&PathId(1)), c.label(&PathId(3)));
        // cheapest cluster first
        assert_eq!(c.label(&PathId(1)), Some(0));
    }

    #[test]
    fn far_apart_functions_are_singletons() {
        let fs: Vec<_> = (0..4).map(|i| lin(i, 0.0, 1000.0 * i as f64)).collect();
        let c = cluster(&fs, 1.0, Grid::new(1, 10, 1), 0).unwrap();
        assert_eq!(c.k, 4);
    }

    #[test]
    fn empty_inputs_error() {
        let g = Grid::new(1, 10, 1);
        assert!(cluster(&[], 1.0, g, 0).is_err());
        assert!(elbow_k(&[], 1.0, g, 0).is_err());
    }

    #[test]
    fn separation_is_strict() {
        let grid = Grid::new(1, 1, 1);
        let mut c = ClusterSet::empty(grid);
        c.k = 2;
        c.centroids = vec![vec![0.0], vec![10.0]];
        assert_eq!(separated_count(&c, 10.0), 0);
        assert_eq!(separated_count(&c, 9.99), 2);
        c.k = 3;
        c.centroids = vec![vec![0.0], vec![100.0], vec![200.0]];
        assert_eq!(separated_count(&c, 50.0), 3);
        c.k = 1;
        c.centroids = vec![vec![5.0]];
        assert_eq!(separated_count(&c, 1e9), 1);
    }

    #[test]
    fn elbow_trivial_thresholds() {
        let grid = Grid::new(1, 10, 1);
        let same: Vec<_> = (0..3).map(|i| lin(i, 1.0, 0.0)).collect();
        assert_eq!(elbow_k(&same, 1000.0, grid, 0).unwrap(), 1);
        let spread: Vec<_> = (0..3).map(|i| lin(i, 0.0, 1e6 * i as f64)).collect();
        assert_eq!(elbow_k(&spread, f64::INFINITY, grid, 0).unwrap(), 1);
    }

    #[test]
    fn fixed_k_records_attained_diameter() {
        let fs: Vec<_> = (0..4).map(|i| lin(i, 0.0, 10.0 * i as f64)).collect();
        let c = cluster_fixed_k(&fs, 2, Grid::new(1, 1, 1), 0).unwrap();
        assert_eq!(c.k, 2);
        assert_eq!(c.epsilon, 10.0);
        let c = cluster_fixed_k(&fs, 9, Grid::new(1, 1, 1), 0).unwrap();
        assert_eq!(c.k, 4);
    }
}
