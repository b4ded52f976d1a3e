//! KMeans under the l1 norm with per-dimension median centroids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::par;

pub const RESTARTS: usize = 10;
pub const MAX_ITERATIONS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansOutcome {
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of l1 distances from each point to its centroid.
    pub cost: f64,
}

fn l1(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(x, y)| (x - y).abs()).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = l1(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn median_of(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len();
    if m % 2 == 1 {
        xs[m / 2]
    } else {
        (xs[m / 2 - 1] + xs[m / 2]) / 2.0
    }
}

fn medians(points: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let dim = points[members[0]].len();
    let mut column = vec![0.0; members.len()];
    (0..dim)
        .map(|d| {
            for (slot, &p) in column.iter_mut().zip(members) {
                *slot = points[p][d];
            }
            median_of(&mut column)
        })
        .collect()
}

/// k-means++ style seeding with l1 weights: each new center is drawn with
/// probability proportional to its distance from the nearest chosen center.
fn seed_centers(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut dist: Vec<f64> = points.iter().map(|p| l1(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, d) in dist.iter().enumerate() {
                if *d > 0.0 && r < *d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            if dist[pick] == 0.0 {
                // rounding pushed us past the end; take the farthest point
                pick = (0..n).max_by(|a, b| dist[*a].total_cmp(&dist[*b]).then(b.cmp(a))).unwrap();
            }
            pick
        } else {
            // fewer distinct points than k: any unchosen index
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.gen_range(0..free.len())]
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            dist[i] = dist[i].min(l1(p, &points[next]));
        }
    }
    chosen
}

/// One Lloyd-style run. Every cluster stays non-empty: an emptied cluster
/// takes the point farthest from its own centroid among clusters with more
/// than one member.
pub fn kmeans_once(points: &[Vec<f64>], k: usize, seed: u64) -> KMeansOutcome {
    let n = points.len();
    assert!(k >= 1 && k <= n, "k={k} out of range for {n} points");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<f64>> =
        seed_centers(points, k, &mut rng).into_iter().map(|i| points[i].clone()).collect();
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..MAX_ITERATIONS {
        let mut next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
        let mut sizes = vec![0usize; k];
        for &c in &next {
            sizes[c] += 1;
        }
        for c in 0..k {
            if sizes[c] > 0 {
                continue;
            }
            let donor = (0..n)
                .filter(|&i| sizes[next[i]] > 1)
                .max_by(|&a, &b| {
                    l1(&points[a], &centroids[next[a]])
                        .total_cmp(&l1(&points[b], &centroids[next[b]]))
                        .then(b.cmp(&a))
                })
                .expect("k <= n leaves a cluster with a spare point");
            sizes[next[donor]] -= 1;
            next[donor] = c;
            sizes[c] = 1;
        }
        let changed = next != assignment;
        assignment = next;
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == c).collect();
            *centroid = medians(points, &members);
        }
        if !changed {
            break;
        }
    }
    let cost = points.iter().zip(&assignment).map(|(p, &c)| l1(p, &centroids[c])).sum();
    KMeansOutcome { assignment, centroids, cost }
}

/// Median centroids and cost of a fixed assignment into `k` nonempty clusters.
pub fn settle(points: &[Vec<f64>], assignment: Vec<usize>, k: usize) -> KMeansOutcome {
    let centroids: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let members: Vec<usize> = (0..points.len()).filter(|&i| assignment[i] == c).collect();
            medians(points, &members)
        })
        .collect();
    let cost = points.iter().zip(&assignment).map(|(p, &c)| l1(p, &centroids[c])).sum();
    KMeansOutcome { assignment, centroids, cost }
}

/// Seed for restart `i` of a run seeded with `seed`.
pub fn restart_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// All restarts for one `k`, in restart order.
pub fn kmeans_restarts(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<KMeansOutcome> {
    par::map_range(RESTARTS, |i| kmeans_once(points, k, restart_seed(seed, i)))
}

/// The lowest-cost restart (earliest on ties).
pub fn kmeans_best(points: &[Vec<f64>], k: usize, seed: u64) -> KMeansOutcome {
    let mut best: Option<KMeansOutcome> = None;
    for o in kmeans_restarts(points, k, seed) {
        if best.as_ref().is_none_or(|b| o.cost < b.cost) {
            best = Some(o);
        }
    }
    best.unwrap()
}
