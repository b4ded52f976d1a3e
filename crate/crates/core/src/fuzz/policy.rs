use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::harness::{ExecutionRecord, TargetInput};
use crate::Error;

/// Population policy driving the fuzz loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    #[default]
    DpFuzz,
    SlowFuzz,
    PerfFuzz,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::DpFuzz, Policy::SlowFuzz, Policy::PerfFuzz];

    pub fn name(self) -> &'static str {
        match self {
            Policy::DpFuzz => "dpfuzz",
            Policy::SlowFuzz => "slowfuzz",
            Policy::PerfFuzz => "perffuzz",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown policy `{s}`")))
    }
}

/// Global population of a baseline policy.
#[derive(Clone, Debug, PartialEq)]
pub enum BaselineState {
    /// Admits only inputs costlier than everything admitted so far.
    SlowFuzz { inputs: Vec<TargetInput>, costs: Vec<f64> },
    /// Admits inputs that reach a new edge or raise some edge's best cost.
    PerfFuzz {
        inputs: Vec<TargetInput>,
        /// edge → (highest cost of a run covering it, index of that input)
        edge_max: BTreeMap<u64, (f64, usize)>,
    },
}

impl BaselineState {
    pub fn new(policy: Policy) -> Option<Self> {
        match policy {
            Policy::DpFuzz => None,
            Policy::SlowFuzz => Some(BaselineState::SlowFuzz { inputs: Vec::new(), costs: Vec::new() }),
            Policy::PerfFuzz => Some(BaselineState::PerfFuzz { inputs: Vec::new(), edge_max: BTreeMap::new() }),
        }
    }

    pub fn would_admit(&self, rec: &ExecutionRecord) -> bool {
        if !rec.is_ok() {
            return false;
        }
        match self {
            BaselineState::SlowFuzz { costs, .. } => costs.last().is_none_or(|max| rec.cost > *max),
            BaselineState::PerfFuzz { edge_max, .. } => rec
                .edges
                .iter()
                .any(|e| edge_max.get(e).is_none_or(|(best, _)| rec.cost > *best)),
        }
    }

    /// Admits `rec` if the policy accepts it.
    pub fn step(&mut self, rec: &ExecutionRecord) -> bool {
        if !self.would_admit(rec) {
            return false;
        }
        match self {
            BaselineState::SlowFuzz { inputs, costs } => {
                inputs.push(rec.input.clone());
                costs.push(rec.cost);
            }
            BaselineState::PerfFuzz { inputs, edge_max } => {
                let idx = inputs.len();
                inputs.push(rec.input.clone());
                for e in &rec.edges {
                    let entry = edge_max.entry(*e).or_insert((f64::NEG_INFINITY, idx));
                    if rec.cost > entry.0 {
                        *entry = (rec.cost, idx);
                    }
                }
            }
        }
        true
    }

    pub fn len(&self) -> usize {
        match self {
            BaselineState::SlowFuzz { inputs, .. } | BaselineState::PerfFuzz { inputs, .. } => inputs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Indices eligible for selection: all inputs for SlowFuzz, current
    /// per-edge maximizers for PerfFuzz.
    pub fn candidates(&self) -> Vec<usize> {
        match self {
            BaselineState::SlowFuzz { inputs, .. } => (0..inputs.len()).collect(),
            BaselineState::PerfFuzz { edge_max, .. } => {
                let owners: BTreeSet<usize> = edge_max.values().map(|(_, i)| *i).collect();
                owners.into_iter().collect()
            }
        }
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&TargetInput> {
        let c = self.candidates();
        if c.is_empty() {
            return None;
        }
        let i = c[rng.gen_range(0..c.len())];
        match self {
            BaselineState::SlowFuzz { inputs, .. } | BaselineState::PerfFuzz { inputs, .. } => inputs.get(i),
        }
    }

    pub fn inputs(&self) -> &[TargetInput] {
        match self {
            BaselineState::SlowFuzz { inputs, .. } | BaselineState::PerfFuzz { inputs, .. } => inputs,
        }
    }
}
