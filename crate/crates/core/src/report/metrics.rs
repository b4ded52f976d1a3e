use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fuzz::{coverage_grid, FuzzResult};
use crate::harness::CostMode;
use crate::model::{elbow_k, PerfFunction};
use crate::Result;

/// Elbow-rule error threshold in executed-lines mode.
pub const ELBOW_THRESHOLD: f64 = 1_000.0;
/// A fit counts as a distinct performance function when its mean absolute
/// residual is below this fraction of the path's mean cost.
pub const FIT_TOLERANCE: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    pub fit_tolerance: f64,
    /// Overrides the mode-dependent default threshold.
    pub elbow_threshold: Option<f64>,
    pub seed: u64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { fit_tolerance: FIT_TOLERANCE, elbow_threshold: None, seed: 0 }
    }
}

/// One row of the comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub target: String,
    pub policy: String,
    /// Samples generated (#N).
    pub samples: u64,
    /// Worst-case cost found (W).
    pub worst: f64,
    /// Unique paths (#P).
    pub paths: usize,
    /// Distinct performance functions (#M).
    pub functions: usize,
    /// Functional clusters by the elbow rule (#K).
    pub clusters: usize,
    pub wall_secs: f64,
}

impl fmt::Display for MetricsRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} | #N={} | W={} | #P={} | #M={} | #K={}",
            self.target, self.policy, self.samples, self.worst, self.paths, self.functions, self.clusters
        )
    }
}

/// Functions that fit their samples well enough to count toward #M.
pub fn distinct_functions(result: &FuzzResult, fit_tolerance: f64) -> Vec<PerfFunction> {
    result
        .functions
        .iter()
        .filter(|f| {
            let s = result.coverage.samples(&f.path);
            let mean = s.iter().map(|x| x.cost).sum::<f64>() / s.len().max(1) as f64;
            f.residual < fit_tolerance * mean
        })
        .cloned()
        .collect()
}

/// Table metrics of a run. The elbow threshold defaults to 1,000 in
/// executed-lines mode and to 1,000 × grid step in wall-clock mode.
pub fn compute_metrics(
    result: &FuzzResult,
    target: &str,
    mode: CostMode,
    wall_secs: f64,
    cfg: &MetricsConfig,
) -> Result<MetricsRow> {
    let grid = coverage_grid(&result.coverage);
    let good = distinct_functions(result, cfg.fit_tolerance);
    let threshold = cfg.elbow_threshold.unwrap_or(match mode {
        CostMode::Lines => ELBOW_THRESHOLD,
        CostMode::Time => ELBOW_THRESHOLD * grid.step as f64,
    });
    let clusters = if good.is_empty() { 0 } else { elbow_k(&good, threshold, grid, cfg.seed)? };
    Ok(MetricsRow {
        target: target.to_string(),
        policy: result.policy.to_string(),
        samples: result.executions,
        worst: result.coverage.max_cost().unwrap_or(0.0),
        paths: result.coverage.path_count(),
        functions: good.len(),
        clusters,
        wall_secs,
    })
}

/// How repeated runs are folded into one row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    /// Per-metric maximum.
    #[default]
    Best,
    /// Per-metric median.
    Median,
}

impl std::str::FromStr for Aggregate {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "best" => Ok(Aggregate::Best),
            "median" => Ok(Aggregate::Median),
            _ => Err(crate::Error::Config(format!("unknown aggregation `{s}`"))),
        }
    }
}

fn fold(xs: Vec<f64>, how: Aggregate) -> f64 {
    match how {
        Aggregate::Best => xs.into_iter().fold(f64::NEG_INFINITY, f64::max),
        Aggregate::Median => crate::harness::median(xs),
    }
}

/// Folds rows of one (target, policy) pair. Wall time is always summed.
pub fn aggregate(rows: &[MetricsRow], how: Aggregate) -> Option<MetricsRow> {
    let first = rows.first()?;
    let col = |f: &dyn Fn(&MetricsRow) -> f64| fold(rows.iter().map(f).collect(), how);
    Some(MetricsRow {
        target: first.target.clone(),
        policy: first.policy.clone(),
        samples: col(&|r| r.samples as f64).round() as u64,
        worst: col(&|r| r.worst),
        paths: col(&|r| r.paths as f64).round() as usize,
        functions: col(&|r| r.functions as f64).round() as usize,
        clusters: col(&|r| r.clusters as f64).round() as usize,
        wall_secs: rows.iter().map(|r| r.wall_secs).sum(),
    })
}

pub fn metrics_csv(rows: &[MetricsRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["target", "policy", "samples", "worst", "paths", "functions", "clusters", "wall_secs"])?;
    for r in rows {
        w.write_record([
            r.target.clone(),
            r.policy.clone(),
            r.samples.to_string(),
            r.worst.to_string(),
            r.paths.to_string(),
            r.functions.to_string(),
            r.clusters.to_string(),
            format!("{:.3}", r.wall_secs),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
}

/// `functions.csv`: one row per fitted path with its cluster (empty when the
/// path has none).
pub fn functions_csv(result: &FuzzResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["path_id", "kind", "a", "b", "n_min", "n_max", "residual", "sample_count", "cluster"])?;
    for f in &result.functions {
        w.write_record([
            f.path.to_string(),
            f.kind.to_string(),
            f.a.to_string(),
            f.b.to_string(),
            f.n_min.to_string(),
            f.n_max.to_string(),
            f.residual.to_string(),
            f.sample_count.to_string(),
            result.clusters.label(&f.path).map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: u64, k: usize) -> MetricsRow {
        MetricsRow {
            target: "Quick Sort".into(),
            policy: "dpfuzz".into(),
            samples: n,
            worst: 721.0,
            paths: 14,
            functions: 11,
            clusters: k,
            wall_secs: 1.0,
        }
    }

    #[test]
    fn table_format() {
        assert_eq!(row(5000, 3).to_string(), "Quick Sort | dpfuzz | #N=5000 | W=721 | #P=14 | #M=11 | #K=3");
    }

    #[test]
    fn aggregation() {
        let rows = [row(10, 1), row(30, 3), row(20, 2)];
        let best = aggregate(&rows, Aggregate::Best).unwrap();
        assert_eq!((best.samples, best.clusters), (30, 3));
        let med = aggregate(&rows, Aggregate::Median).unwrap();
        assert_eq!((med.samples, med.clusters), (20, 2));
        assert_eq!(med.wall_secs, 3.0);
        assert!(aggregate(&[], Aggregate::Best).is_none());
    }

    #[test]
    fn metrics_csv_header() {
        let s = metrics_csv(&[row(1, 1)]).unwrap();
        assert!(s.starts_with("target,policy,samples,worst,paths,functions,clusters,wall_secs\n"));
        assert!(s.contains("Quick Sort,dpfuzz,1,721,14,11,1,1.000"));
    }
}
