use serde::{Deserialize, Serialize};

use super::PerfFunction;
use crate::par;

pub const MAX_GRID_POINTS: u64 = 512;

/// Integer sizes `lo, lo+step, …` not exceeding `hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: u64,
    pub hi: u64,
    pub step: u64,
}

impl Grid {
    pub fn new(lo: u64, hi: u64, step: u64) -> Self {
        assert!(step >= 1 && lo <= hi, "empty grid");
        Grid { lo, hi, step }
    }

    /// Sizes `1..=max_size` with the step chosen to keep at most 512 points.
    pub fn auto(max_size: u64) -> Self {
        let hi = max_size.max(1);
        let step = hi.div_ceil(MAX_GRID_POINTS).max(1);
        Grid { lo: 1, hi, step }
    }

    pub fn points(&self) -> impl Iterator<Item = u64> + '_ {
        (self.lo..=self.hi).step_by(self.step as usize)
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Evaluation vector of `f` on the grid.
pub fn embed(f: &PerfFunction, grid: &Grid) -> Vec<f64> {
    grid.points().map(|n| f.eval(n as f64)).collect()
}

/// Riemann-sum l1 distance between two evaluation vectors.
pub fn l1_vectors(u: &[f64], v: &[f64], step: u64) -> f64 {
    u.iter().zip(v).map(|(x, y)| (x - y).abs()).sum::<f64>() * step as f64
}

/// `Σ |f(n) − g(n)| · step` over the grid, extrapolating outside fitted domains.
pub fn l1_distance(f: &PerfFunction, g: &PerfFunction, grid: &Grid) -> f64 {
    grid.points()
        .map(|n| (f.eval(n as f64) - g.eval(n as f64)).abs())
        .sum::<f64>()
        * grid.step as f64
}

/// Symmetric matrix of pairwise l1 distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub n: usize,
    pub grid: Grid,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_vectors(vectors: &[Vec<f64>], grid: Grid) -> Self {
        let n = vectors.len();
        let rows = par::map_range(n, |i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { l1_vectors(&vectors[i], &vectors[j], grid.step) })
                .collect::<Vec<f64>>()
        });
        let mut data: Vec<f64> = rows.into_iter().flatten().collect();
        // exact symmetry regardless of summation order
        for i in 0..n {
            for j in 0..i {
                data[i * n + j] = data[j * n + i];
            }
        }
        DistanceMatrix { n, grid, data }
    }

    pub fn from_functions(functions: &[PerfFunction], grid: Grid) -> Self {
        let vectors = par::map(functions, |f| embed(f, &grid));
        Self::from_vectors(&vectors, grid)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Median of the strictly upper-triangular entries.
    pub fn median_pairwise(&self) -> Option<f64> {
        let mut xs: Vec<f64> = (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        if xs.is_empty() {
            return None;
        }
        xs.sort_by(f64::total_cmp);
        let m = xs.len();
        Some(if m % 2 == 1 { xs[m / 2] } else { (xs[m / 2 - 1] + xs[m / 2]) / 2.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::PathId;
    use crate::model::FunctionKind;

    fn lin(a: f64, b: f64) -> PerfFunction {
        PerfFunction {
            path: PathId(0),
            kind: FunctionKind::Linear,
            a,
            b,
            n_min: 1,
            n_max: 10,
            residual: 0.0,
            sample_count: 2,
        }
    }

    #[test]
    fn linear_pair_distance_is_direct_sum() {
        // |(2n+1) - (n+1)| = n, summed over 1..=10
        let d = l1_distance(&lin(2.0, 1.0), &lin(1.0, 1.0), &Grid::new(1, 10, 1));
        assert_eq!(d, 55.0);
        assert_eq!(l1_distance(&lin(2.0, 1.0), &lin(2.0, 1.0), &Grid::new(1, 10, 1)), 0.0);
    }

    #[test]
    fn auto_grid_caps_points() {
        assert_eq!(Grid::auto(0), Grid::new(1, 1, 1));
        assert_eq!(Grid::auto(32).len(), 32);
        let g = Grid::auto(5000);
        assert!(g.len() <= 512);
        assert_eq!(g.points().count(), g.len());
    }

    #[test]
    fn matrix_is_symmetric_with_zero_diagonal() {
        let fs = vec![lin(1.0, 0.0), lin(2.0, 3.0), lin(0.5, 7.0)];
        let m = DistanceMatrix::from_functions(&fs, Grid::new(1, 20, 1));
        for i in 0..3 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(j, i));
                assert!(m.get(i, j) >= 0.0);
            }
        }
    }
}
