use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::{CoverageMap, PopulationMap};
use crate::harness::{PathId, TargetInput};
use crate::model::ClusterSet;
use crate::{Error, Result};

/// Weight given to entries whose score is zero.
pub const FALLBACK_WEIGHT: f64 = 1.0;

fn weight(score: f64) -> f64 {
    if score > 0.0 && score.is_finite() {
        score
    } else {
        FALLBACK_WEIGHT
    }
}

/// Index drawn with probability proportional to `weight(scores[i])`.
pub fn weighted_choice<R: Rng + ?Sized>(scores: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let w: Vec<f64> = scores.map(weight).collect();
    WeightedIndex::new(&w).expect("positive weights").sample(rng)
}

/// Selection buckets: one per cluster, plus one holding paths that have no
/// performance function yet.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Buckets {
    pub groups: Vec<Vec<PathId>>,
    unmodeled: Option<usize>,
}

impl Buckets {
    pub fn new(clusters: &ClusterSet, cov: &CoverageMap) -> Self {
        let mut groups: Vec<Vec<PathId>> =
            clusters.members().into_iter().filter(|g| !g.is_empty()).collect();
        let rest: Vec<PathId> =
            cov.paths.keys().filter(|p| !clusters.assignment.contains_key(p)).copied().collect();
        let mut unmodeled = None;
        if !rest.is_empty() {
            unmodeled = Some(groups.len());
            groups.push(rest);
        }
        Buckets { groups, unmodeled }
    }

    /// Registers a path first seen after the last clustering.
    pub fn add_new_path(&mut self, path: PathId) {
        match self.unmodeled {
            Some(i) => self.groups[i].push(path),
            None => {
                self.unmodeled = Some(self.groups.len());
                self.groups.push(vec![path]);
            }
        }
    }

    pub fn paths(&self) -> BTreeSet<PathId> {
        self.groups.iter().flatten().copied().collect()
    }
}

/// Picks a bucket uniformly, a path by score, and an input by cost.
pub fn select_in<'a, R: Rng + ?Sized>(
    buckets: &Buckets,
    cov: &CoverageMap,
    pop: &'a PopulationMap,
    rng: &mut R,
) -> Result<&'a TargetInput> {
    select_path_in(buckets, cov, pop, rng).map(|(_, x)| x)
}

/// Like [`select_in`], also returning the path of the chosen input.
pub fn select_path_in<'a, R: Rng + ?Sized>(
    buckets: &Buckets,
    cov: &CoverageMap,
    pop: &'a PopulationMap,
    rng: &mut R,
) -> Result<(PathId, &'a TargetInput)> {
    if buckets.groups.is_empty() || pop.is_empty() {
        return Err(Error::Empty("population is empty"));
    }
    let group = &buckets.groups[rng.gen_range(0..buckets.groups.len())];
    let path = group[weighted_choice(group.iter().map(|p| cov.score(p)), rng)];
    let samples = cov.samples(&path);
    let i = weighted_choice(samples.iter().map(|s| s.cost), rng);
    pop.paths
        .get(&path)
        .and_then(|v| v.get(i))
        .map(|x| (path, x))
        .ok_or(Error::Empty("selected path has no inputs"))
}

/// One selection step over a clustering.
pub fn select<'a, R: Rng + ?Sized>(
    clusters: &ClusterSet,
    cov: &CoverageMap,
    pop: &'a PopulationMap,
    rng: &mut R,
) -> Result<&'a TargetInput> {
    select_in(&Buckets::new(clusters, cov), cov, pop, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzz::Sample;
    use crate::model::Grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn world(paths: &[(u64, f64)]) -> (CoverageMap, PopulationMap) {
        let mut cov = CoverageMap::default();
        let mut pop = PopulationMap::default();
        for (p, cost) in paths {
            cov.paths.insert(PathId(*p), vec![Sample { size: 1, cost: *cost }]);
            pop.paths.insert(PathId(*p), vec![TargetInput::bytes(vec![*p as u8])]);
        }
        (cov, pop)
    }

    #[test]
    fn forced_choice() {
        let (cov, pop) = world(&[(4, 10.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let clusters = ClusterSet::empty(Grid::new(1, 1, 1));
        assert_eq!(select(&clusters, &cov, &pop, &mut rng).unwrap(), &TargetInput::bytes(vec![4]));
    }

    #[test]
    fn empty_population_errors() {
        let (cov, pop) = world(&[]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(select(&ClusterSet::empty(Grid::new(1, 1, 1)), &cov, &pop, &mut rng).is_err());
    }

    #[test]
    fn new_paths_join_the_unmodeled_bucket() {
        let (cov, _) = world(&[(1, 1.0)]);
        let mut b = Buckets::new(&ClusterSet::empty(Grid::new(1, 1, 1)), &cov);
        b.add_new_path(PathId(2));
        assert_eq!(b.groups, vec![vec![PathId(1), PathId(2)]]);
    }
}
