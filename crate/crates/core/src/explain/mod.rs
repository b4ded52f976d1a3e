//! Discriminants between performance clusters: decision trees over input
//! parameters and over internal trace counts.

mod features;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use features::{
    extract_internal_features, extract_param_features, Column, ColumnKind, FeatureMatrix, RowSource, Value,
    BYTE_FEATURES,
};
pub use tree::{
    best_split, gini, gini_gain, learn_tree, tree_predicates, Condition, Conjunction, DecisionTree, Node, Predicate,
    SplitChoice, TreeConfig, GAIN_TOLERANCE,
};

use crate::fuzz::{coverage_grid, FuzzResult};
use crate::harness::{run_instrumented, TargetSpec};
use crate::model::{cluster_fixed_k, ClusterSet};
use crate::{par, Error, Result};

/// Which feature spaces to explain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Input,
    Internal,
    #[default]
    Both,
}

impl Space {
    pub fn input(self) -> bool {
        matches!(self, Space::Input | Space::Both)
    }

    pub fn internal(self) -> bool {
        matches!(self, Space::Internal | Space::Both)
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "input" => Ok(Space::Input),
            "internal" => Ok(Space::Internal),
            "both" => Ok(Space::Both),
            _ => Err(Error::Config(format!("unknown space `{s}`"))),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Input => "input",
            Space::Internal => "internal",
            Space::Both => "both",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExplainConfig {
    /// Re-cluster into this many clusters before learning.
    pub k: Option<usize>,
    pub space: Space,
    pub tree: TreeConfig,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeReport {
    pub tree: DecisionTree,
    pub accuracy: f64,
    pub rows: usize,
    pub predicates: BTreeMap<usize, Vec<Conjunction>>,
}

impl TreeReport {
    fn learn(m: &FeatureMatrix, labels: &[usize], cfg: &TreeConfig) -> Result<Self> {
        let tree = learn_tree(m, labels, cfg)?;
        Ok(TreeReport {
            accuracy: tree.accuracy(m, labels),
            predicates: tree_predicates(&tree),
            rows: m.len(),
            tree,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub k: usize,
    pub input: Option<TreeReport>,
    pub internal: Option<TreeReport>,
    /// Re-executions that did not finish normally.
    pub failed_runs: usize,
}

/// Learns discriminants between the clusters of a fuzzing result.
///
/// Only inputs whose path carries a cluster label take part. The internal
/// tree is learned from fresh instrumented runs of those inputs; more than
/// half of them failing is an error.
pub fn explain(result: &FuzzResult, spec: &TargetSpec, cfg: &ExplainConfig) -> Result<Explanation> {
    let clusters: ClusterSet = match cfg.k {
        Some(k) if !result.functions.is_empty() => {
            cluster_fixed_k(&result.functions, k, coverage_grid(&result.coverage), cfg.seed)?
        }
        _ => result.clusters.clone(),
    };
    let all = extract_param_features(&result.population, &spec.measure)?;
    let labelled = all.filter_rows(|i| all.sources[i].path.is_some_and(|p| clusters.label(&p).is_some()));
    if labelled.is_empty() {
        return Err(Error::Empty("no population input belongs to a cluster"));
    }
    let label_of = |s: &RowSource| s.path.and_then(|p| clusters.label(&p)).expect("filtered");
    let labels: Vec<usize> = labelled.sources.iter().map(label_of).collect();

    let input = if cfg.space.input() { Some(TreeReport::learn(&labelled, &labels, &cfg.tree)?) } else { None };

    let mut failed_runs = 0;
    let internal = if cfg.space.internal() {
        let inputs: Vec<_> = labelled
            .sources
            .iter()
            .map(|s| &result.population.paths[&s.path.expect("filtered")][s.index])
            .collect();
        let runs = par::map(&inputs, |x| run_instrumented(spec, x));
        let mut records = Vec::with_capacity(runs.len());
        let mut run_labels = Vec::with_capacity(runs.len());
        for (run, label) in runs.into_iter().zip(&labels) {
            match run {
                Ok(rec) if rec.is_ok() => {
                    records.push(rec);
                    run_labels.push(*label);
                }
                Ok(rec) => {
                    log::warn!("re-execution ended with {:?}", rec.status);
                    failed_runs += 1;
                }
                Err(e) => {
                    log::warn!("re-execution failed: {e}");
                    failed_runs += 1;
                }
            }
        }
        if 2 * failed_runs > inputs.len() {
            return Err(Error::Reexecution { failed: failed_runs, total: inputs.len() });
        }
        let m = extract_internal_features(&records)?;
        Some(TreeReport::learn(&m, &run_labels, &cfg.tree)?)
    } else {
        None
    };

    Ok(Explanation { k: clusters.k, input, internal, failed_runs })
}
