use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::harness::{ExecutionRecord, PathId, TargetInput};

/// One retained (size, cost) observation of a path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub size: u64,
    pub cost: f64,
}

/// Per-path samples, at most one per size, each holding the highest cost seen.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoverageMap {
    pub paths: BTreeMap<PathId, Vec<Sample>>,
}

/// Inputs aligned index-for-index with [`CoverageMap`] samples.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PopulationMap {
    pub paths: BTreeMap<PathId, Vec<TargetInput>>,
}

impl CoverageMap {
    pub fn samples(&self, path: &PathId) -> &[Sample] {
        self.paths.get(path).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn retained(&self, path: &PathId, size: u64) -> Option<f64> {
        self.samples(path).iter().find(|s| s.size == size).map(|s| s.cost)
    }

    /// Score of a path: its highest retained cost.
    pub fn score(&self, path: &PathId) -> f64 {
        self.samples(path).iter().map(|s| s.cost).fold(0.0, f64::max)
    }

    pub fn max_cost(&self) -> Option<f64> {
        self.paths.values().flatten().map(|s| s.cost).reduce(f64::max)
    }

    pub fn max_size(&self) -> Option<u64> {
        self.paths.values().flatten().map(|s| s.size).max()
    }

    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn sample_count(&self) -> usize {
        self.paths.values().map(Vec::len).sum()
    }

    /// `(size, cost)` pairs of a path, for fitting.
    pub fn points(&self, path: &PathId) -> Vec<(u64, f64)> {
        self.samples(path).iter().map(|s| (s.size, s.cost)).collect()
    }
}

impl PopulationMap {
    pub fn is_empty(&self) -> bool {
        self.paths.values().all(Vec::is_empty)
    }

    pub fn len(&self) -> usize {
        self.paths.values().map(Vec::len).sum()
    }

    pub fn inputs(&self) -> impl Iterator<Item = (&PathId, &TargetInput)> {
        self.paths.iter().flat_map(|(p, v)| v.iter().map(move |x| (p, x)))
    }
}

/// Whether `record` opens a new path, a new size on a known path, or beats the
/// retained cost at its (path, size).
pub fn admit(cov: &CoverageMap, record: &ExecutionRecord) -> bool {
    if !record.is_ok() {
        log::debug!("not admitting {:?} record on path {}", record.status, record.path);
        return false;
    }
    match cov.retained(&record.path, record.size) {
        None => true,
        Some(cost) => record.cost > cost,
    }
}

/// Applies [`admit`] and, on success, updates both maps together.
pub fn retain(cov: &mut CoverageMap, pop: &mut PopulationMap, record: &ExecutionRecord) -> bool {
    if !admit(cov, record) {
        return false;
    }
    let samples = cov.paths.entry(record.path).or_default();
    let inputs = pop.paths.entry(record.path).or_default();
    let sample = Sample { size: record.size, cost: record.cost };
    match samples.iter().position(|s| s.size == record.size) {
        Some(i) => {
            samples[i] = sample;
            inputs[i] = record.input.clone();
        }
        None => {
            samples.push(sample);
            inputs.push(record.input.clone());
        }
    }
    debug_assert_eq!(samples.len(), inputs.len());
    true
}
