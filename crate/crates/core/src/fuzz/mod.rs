//! The evolutionary loop: multi-population search with periodic functional
//! clustering, plus the SlowFuzz and PerfFuzz baselines.

mod coverage;
mod mutate;
mod policy;
mod select;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use coverage::{admit, retain, CoverageMap, PopulationMap, Sample};
pub use mutate::{apply_byte_op, apply_record_op, crossover, crossover_at, mutate, ByteOp, RecordOp, BYTE_OPS, RECORD_OPS};
pub use policy::{BaselineState, Policy};
pub use select::{select, select_in, select_path_in, weighted_choice, Buckets, FALLBACK_WEIGHT};

use crate::harness::{run_instrumented, ExecutionRecord, PathId, Status, TargetInput, TargetSpec};
use crate::model::{cluster, fit_perf_function, separated_count, ClusterSet, DistanceMatrix, Grid, PerfFunction};
use crate::{par, Error, Result};

pub const DEFAULT_ITERATIONS: u64 = 100_000;
pub const DEFAULT_CLUSTER_INTERVAL: u64 = 1_000;
pub const DEFAULT_TARGET_CLUSTERS: usize = 32;
pub const DEFAULT_CROSSOVER_RATE: f64 = 0.2;
/// Default ε as a fraction of the median pairwise distance.
pub const EPSILON_FRACTION: f64 = 0.05;
/// Default ς as a multiple of ε.
pub const SIGMA_FACTOR: f64 = 4.0;
const MAX_FAILURE_EVENTS: usize = 1_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub max_iterations: u64,
    pub cluster_interval: u64,
    /// Fixed ε; `None` derives it from the first informative clustering.
    pub epsilon: Option<f64>,
    /// Fixed ς; `None` uses `4ε`.
    pub sigma: Option<f64>,
    pub target_clusters: usize,
    pub time_budget: Option<Duration>,
    pub rng_seed: u64,
    pub policy: Policy,
    pub seeds: Vec<TargetInput>,
    /// Executions per batch. With more than one, a batch is selected up front,
    /// executed in parallel, and admitted in order.
    pub workers: usize,
    pub crossover_rate: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            max_iterations: DEFAULT_ITERATIONS,
            cluster_interval: DEFAULT_CLUSTER_INTERVAL,
            epsilon: None,
            sigma: None,
            target_clusters: DEFAULT_TARGET_CLUSTERS,
            time_budget: None,
            rng_seed: 0,
            policy: Policy::DpFuzz,
            seeds: Vec::new(),
            workers: 1,
            crossover_rate: DEFAULT_CROSSOVER_RATE,
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.max_iterations < 1 {
            return bad("max iterations must be at least 1");
        }
        if self.cluster_interval < 1 {
            return bad("cluster interval must be at least 1");
        }
        if self.target_clusters < 1 {
            return bad("target cluster count must be at least 1");
        }
        if self.workers < 1 {
            return bad("worker count must be at least 1");
        }
        if self.epsilon.is_some_and(|e| !(e >= 0.0 && e.is_finite())) {
            return bad("epsilon must be finite and nonnegative");
        }
        if self.sigma.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
            return bad("sigma must be finite and positive");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover rate must lie in [0, 1]");
        }
        if self.seeds.is_empty() {
            return bad("seed corpus is empty");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Iterations,
    TimeBudget,
    Separated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Admit { step: u64, path: PathId, size: u64, cost: f64 },
    Cluster { step: u64, k: usize, separated: usize, epsilon: f64, modeled: usize },
    Failure { step: u64, status: Status, input: TargetInput },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzResult {
    pub policy: Policy,
    pub coverage: CoverageMap,
    pub population: PopulationMap,
    pub functions: Vec<PerfFunction>,
    pub clusters: ClusterSet,
    pub epsilon: f64,
    pub sigma: f64,
    /// Loop iterations after the seeds.
    pub iterations: u64,
    /// Executions including seeds (#N).
    pub executions: u64,
    pub crashes: u64,
    pub timeouts: u64,
    pub stop: StopReason,
    pub events: Vec<Event>,
}

/// Fits a performance function to every path with enough samples.
pub fn fit_coverage(cov: &CoverageMap) -> Vec<PerfFunction> {
    let paths: Vec<(&PathId, &Vec<Sample>)> = cov.paths.iter().collect();
    par::map(&paths, |(p, s)| {
        let points: Vec<(u64, f64)> = s.iter().map(|x| (x.size, x.cost)).collect();
        fit_perf_function(**p, &points).ok()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Grid shared by all functions of a coverage map.
pub fn coverage_grid(cov: &CoverageMap) -> Grid {
    Grid::auto(cov.max_size().unwrap_or(1))
}

struct Engine<'a> {
    spec: &'a TargetSpec,
    config: &'a FuzzConfig,
    rng: ChaCha8Rng,
    cov: CoverageMap,
    pop: PopulationMap,
    baseline: Option<BaselineState>,
    functions: Vec<PerfFunction>,
    clusters: ClusterSet,
    buckets: Buckets,
    epsilon: Option<f64>,
    sigma: f64,
    executions: u64,
    crashes: u64,
    timeouts: u64,
    failures_logged: usize,
    events: Vec<Event>,
}

impl Engine<'_> {
    fn epsilon(&self) -> f64 {
        self.config.epsilon.or(self.epsilon).unwrap_or(0.0)
    }

    fn recluster(&mut self, step: u64) -> Result<()> {
        let grid = coverage_grid(&self.cov);
        self.functions = fit_coverage(&self.cov);
        if self.config.epsilon.is_none() && self.epsilon.is_none() {
            let dm = DistanceMatrix::from_functions(&self.functions, grid);
            if let Some(m) = dm.median_pairwise().filter(|m| *m > 0.0) {
                self.epsilon = Some(EPSILON_FRACTION * m);
                log::info!("epsilon fixed at {:.3} (median distance {m:.3})", EPSILON_FRACTION * m);
            }
        }
        let eps = self.epsilon();
        self.sigma = self.config.sigma.unwrap_or(SIGMA_FACTOR * eps);
        self.clusters = if self.functions.is_empty() {
            ClusterSet::empty(grid)
        } else {
            let mut c = cluster(&self.functions, eps, grid, self.config.rng_seed)?;
            c.separated_count = separated_count(&c, self.sigma);
            c
        };
        self.buckets = Buckets::new(&self.clusters, &self.cov);
        self.events.push(Event::Cluster {
            step,
            k: self.clusters.k,
            separated: self.clusters.separated_count,
            epsilon: eps,
            modeled: self.functions.len(),
        });
        log::debug!(
            "step {step}: {} paths, {} modeled, k={} separated={}",
            self.cov.path_count(),
            self.functions.len(),
            self.clusters.k,
            self.clusters.separated_count
        );
        Ok(())
    }

    /// Feeds one finished execution to the population.
    fn absorb(&mut self, step: u64, rec: &ExecutionRecord) {
        self.executions += 1;
        if !rec.is_ok() {
            match rec.status {
                Status::Crash => self.crashes += 1,
                Status::Timeout => self.timeouts += 1,
                Status::Ok => {}
            }
            log::debug!("step {step}: {:?}", rec.status);
            if self.failures_logged < MAX_FAILURE_EVENTS {
                self.failures_logged += 1;
                self.events.push(Event::Failure { step, status: rec.status, input: rec.input.clone() });
            }
            return;
        }
        if let Some(b) = self.baseline.as_mut() {
            if !b.step(rec) {
                return;
            }
        }
        let new_path = !self.cov.paths.contains_key(&rec.path);
        if retain(&mut self.cov, &mut self.pop, rec) {
            if new_path {
                self.buckets.add_new_path(rec.path);
            }
            self.events.push(Event::Admit { step, path: rec.path, size: rec.size, cost: rec.cost });
        }
    }

    fn parent(&mut self) -> Result<(Option<PathId>, TargetInput)> {
        match &self.baseline {
            Some(b) => b.select(&mut self.rng).cloned().map(|x| (None, x)).ok_or(Error::Empty("population is empty")),
            None => select_path_in(&self.buckets, &self.cov, &self.pop, &mut self.rng).map(|(p, x)| (Some(p), x.clone())),
        }
    }

    /// A crossover partner: from the parent's path when it holds at least two
    /// inputs, else from the whole population.
    fn partner(&mut self, path: Option<PathId>) -> Option<TargetInput> {
        if let Some(b) = &self.baseline {
            let inputs = b.inputs();
            return (!inputs.is_empty()).then(|| inputs[self.rng.gen_range(0..inputs.len())].clone());
        }
        if let Some(own) = path.and_then(|p| self.pop.paths.get(&p)).filter(|v| v.len() >= 2) {
            return Some(own[self.rng.gen_range(0..own.len())].clone());
        }
        let total = self.pop.len();
        if total == 0 {
            return None;
        }
        let mut i = self.rng.gen_range(0..total);
        for v in self.pop.paths.values() {
            if i < v.len() {
                return Some(v[i].clone());
            }
            i -= v.len();
        }
        None
    }

    fn child(&mut self) -> Result<TargetInput> {
        let (path, parent) = self.parent()?;
        let domain = &self.spec.domain;
        let wants_cross = self.rng.gen_bool(self.config.crossover_rate);
        let partner = self.partner(path);
        let mut x = mutate(&parent, domain, partner.as_ref(), &mut self.rng);
        if wants_cross {
            if let Some(p) = partner {
                x = crossover(&x, &p, &mut self.rng)?;
                x = domain.clamp(x, &mut || self.rng.gen());
            }
        }
        Ok(x)
    }
}

/// Runs the evolutionary search on `spec`.
pub fn fuzz(spec: &TargetSpec, config: &FuzzConfig) -> Result<FuzzResult> {
    spec.validate()?;
    config.validate()?;
    for seed in &config.seeds {
        spec.domain.check(seed)?;
    }
    let started = Instant::now();
    let out_of_time = || config.time_budget.is_some_and(|b| started.elapsed() >= b);
    let grid = Grid::auto(1);
    let mut e = Engine {
        spec,
        config,
        rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
        cov: CoverageMap::default(),
        pop: PopulationMap::default(),
        baseline: BaselineState::new(config.policy),
        functions: Vec::new(),
        clusters: ClusterSet::empty(grid),
        buckets: Buckets::default(),
        epsilon: None,
        sigma: config.sigma.unwrap_or(0.0),
        executions: 0,
        crashes: 0,
        timeouts: 0,
        failures_logged: 0,
        events: Vec::new(),
    };

    let seed_runs = par::map(&config.seeds, |s| run_instrumented(spec, s));
    for (index, rec) in seed_runs.into_iter().enumerate() {
        let rec = rec?;
        if !rec.is_ok() {
            return Err(Error::SeedFailed { index, status: rec.status.to_string() });
        }
        e.absorb(0, &rec);
    }
    e.recluster(0)?;

    let mut step = 0u64;
    let stop = loop {
        if step >= config.max_iterations {
            break StopReason::Iterations;
        }
        if out_of_time() {
            break StopReason::TimeBudget;
        }
        if config.policy == Policy::DpFuzz && e.clusters.separated_count >= config.target_clusters {
            break StopReason::Separated;
        }
        let batch = (config.workers as u64).min(config.max_iterations - step) as usize;
        let mut children = Vec::with_capacity(batch);
        for _ in 0..batch {
            children.push(e.child()?);
        }
        let records: Vec<Result<ExecutionRecord>> = if batch == 1 {
            vec![run_instrumented(spec, &children[0])]
        } else {
            par::map(&children, |x| run_instrumented(spec, x))
        };
        for rec in records {
            step += 1;
            e.absorb(step, &rec?);
            if step % config.cluster_interval == 0 {
                e.recluster(step)?;
            }
        }
    };
    e.recluster(step)?;
    log::info!(
        "{} on {}: {} executions, {} paths, stop {:?}",
        config.policy,
        spec.name,
        e.executions,
        e.cov.path_count(),
        stop
    );

    Ok(FuzzResult {
        policy: config.policy,
        epsilon: e.epsilon(),
        sigma: e.sigma,
        coverage: e.cov,
        population: e.pop,
        functions: e.functions,
        clusters: e.clusters,
        iterations: step,
        executions: e.executions,
        crashes: e.crashes,
        timeouts: e.timeouts,
        stop,
        events: e.events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let ok = FuzzConfig { seeds: vec![TargetInput::bytes(vec![1])], ..Default::default() };
        assert!(ok.validate().is_ok());
        assert!(FuzzConfig { seeds: vec![], ..ok.clone() }.validate().is_err());
        assert!(FuzzConfig { max_iterations: 0, ..ok.clone() }.validate().is_err());
        assert!(FuzzConfig { cluster_interval: 0, ..ok.clone() }.validate().is_err());
        assert!(FuzzConfig { target_clusters: 0, ..ok.clone() }.validate().is_err());
        assert!(FuzzConfig { sigma: Some(0.0), ..ok.clone() }.validate().is_err());
    }

    #[test]
    fn seeds_outside_domain_are_rejected_up_front() {
        let spec = TargetSpec::builtin("insertionx").unwrap();
        let cfg = FuzzConfig { seeds: vec![TargetInput::bytes(vec![0; 1000])], ..Default::default() };
        assert!(matches!(fuzz(&spec, &cfg), Err(Error::Domain(_))));
    }
}
