//! Target programs and instrumented execution.

mod external;
pub mod input;
pub mod targets;
pub mod tracer;
pub mod wire;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use external::ExternalCommand;
pub use input::{
    input_size, InputDomain, ParamKind, ParamRecord, ParamSpec, ParamValue, Shape, ShapeBounds,
    SizeMeasure, TargetInput,
};
pub use tracer::{Block, Interrupt, Probed, Tracer};

use crate::{Error, Result};

/// Default per-execution timeout.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(15 * 60);
/// Default number of timed repetitions in wall-clock mode.
pub const DEFAULT_TIME_REPEATS: usize = 3;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Identifier of a simple path: a hash of the set of visited edges.
///
/// Serialized as 16 lowercase hex digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathId(pub u64);

impl std::str::FromStr for PathId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        u64::from_str_radix(s, 16).map(PathId)
    }
}

impl Serialize for PathId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PathId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// 64-bit FNV-1a over the sorted, deduplicated edge ids (little-endian).
pub fn path_id<'a, I>(edges: I) -> PathId
where
    I: IntoIterator<Item = &'a u64>,
{
    let set: BTreeSet<u64> = edges.into_iter().copied().collect();
    let mut h = FNV_OFFSET;
    for e in set {
        for b in e.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    PathId(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Timeout,
    Crash,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::Timeout => "timeout",
            Status::Crash => "crash",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Executed source lines.
    Lines,
    /// Median wall-clock time in microseconds.
    Time,
}

/// Result of one instrumented execution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub input: TargetInput,
    pub size: u64,
    pub edges: BTreeSet<u64>,
    pub path: PathId,
    pub cost: f64,
    pub internal_counts: BTreeMap<String, u64>,
    pub status: Status,
}

impl ExecutionRecord {
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}

/// A program with hand-placed probes that runs in-process.
pub trait Target: Send + Sync {
    fn name(&self) -> &str;
    /// Namespace for this target's edge ids.
    fn tag(&self) -> u16;
    fn blocks(&self) -> &'static [Block];
    fn domain(&self) -> InputDomain;
    fn seeds(&self) -> Vec<TargetInput> {
        default_seeds(&self.domain())
    }
    fn execute(&self, input: &TargetInput, tracer: &mut Tracer) -> Probed;
}

/// A small deterministic seed corpus covering the low end of a domain.
pub fn default_seeds(domain: &InputDomain) -> Vec<TargetInput> {
    match domain {
        InputDomain::Bytes { min_len, max_len } => {
            let hi = (*min_len + 3).min(*max_len);
            (*min_len..=hi)
                .map(|len| {
                    TargetInput::bytes(
                        (0..len).map(|i| ((i * 37 + len * 11) % 256) as u8).collect::<Vec<u8>>(),
                    )
                })
                .collect()
        }
        InputDomain::Params { params, shape, .. } => {
            let variants = params
                .iter()
                .map(|p| match &p.kind {
                    ParamKind::Categorical(v) => v.len(),
                    _ => 2,
                })
                .max()
                .unwrap_or(1);
            (0..variants)
                .map(|j| {
                    let values = params
                        .iter()
                        .map(|p| {
                            let v = match &p.kind {
                                ParamKind::Categorical(set) => ParamValue::Cat(set[j % set.len()].clone()),
                                ParamKind::Int { min, max } => {
                                    ParamValue::Int(if j % 2 == 0 { *min } else { min + (max - min) / 2 })
                                }
                                ParamKind::Real { min, max } => {
                                    ParamValue::Real(if j % 2 == 0 { *min } else { min + (max - min) / 2.0 })
                                }
                            };
                            (p.name.clone(), v)
                        })
                        .collect();
                    let shape = shape.map(|b| Shape {
                        samples: (b.samples.0 + j as u64).min(b.samples.1),
                        features: b.features.0,
                    });
                    TargetInput::Params(ParamRecord { values, shape })
                })
                .collect()
        }
    }
}

#[derive(Clone)]
pub enum Program {
    Native(Arc<dyn Target>),
    External(ExternalCommand),
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Native(t) => write!(f, "Native({})", t.name()),
            Program::External(c) => write!(f, "External({:?})", c.command),
        }
    }
}

/// Everything needed to execute a target.
#[derive(Clone, Debug)]
pub struct TargetSpec {
    pub name: String,
    pub program: Program,
    pub domain: InputDomain,
    pub measure: SizeMeasure,
    pub timeout: Duration,
    pub cost_mode: CostMode,
    pub time_repeats: usize,
}

impl TargetSpec {
    pub fn native(target: Arc<dyn Target>) -> Self {
        let domain = target.domain();
        TargetSpec {
            name: target.name().to_string(),
            measure: domain.size_measure(),
            domain,
            program: Program::Native(target),
            timeout: DEFAULT_TIMEOUT,
            cost_mode: CostMode::Lines,
            time_repeats: DEFAULT_TIME_REPEATS,
        }
    }

    /// One of the built-in targets, by name.
    pub fn builtin(name: &str) -> Result<Self> {
        targets::lookup(name).map(TargetSpec::native)
    }

    pub fn external(command: impl Into<String>, domain: InputDomain) -> Self {
        TargetSpec {
            name: "external".to_string(),
            measure: domain.size_measure(),
            domain,
            program: Program::External(ExternalCommand { command: command.into() }),
            timeout: DEFAULT_TIMEOUT,
            cost_mode: CostMode::Lines,
            time_repeats: DEFAULT_TIME_REPEATS,
        }
    }

    pub fn with_cost_mode(mut self, mode: CostMode) -> Self {
        self.cost_mode = mode;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout.is_zero() {
            return Err(Error::Config("timeout must be positive".into()));
        }
        if self.time_repeats == 0 {
            return Err(Error::Config("time repeats must be at least 1".into()));
        }
        self.domain.validate()
    }

    /// Seed corpus suggested by the target.
    pub fn default_seeds(&self) -> Vec<TargetInput> {
        match &self.program {
            Program::Native(t) => t.seeds(),
            Program::External(_) => default_seeds(&self.domain),
        }
    }

    pub fn size_of(&self, input: &TargetInput) -> u64 {
        input_size(input, &self.measure)
    }
}

/// Executes `input` under instrumentation.
///
/// Inputs outside the spec's domain are rejected before execution. Timeouts
/// and crashes are reported through [`ExecutionRecord::status`].
pub fn run_instrumented(spec: &TargetSpec, input: &TargetInput) -> Result<ExecutionRecord> {
    spec.domain.check(input)?;
    let size = spec.size_of(input);
    let raw = match &spec.program {
        Program::Native(target) => run_native(target.as_ref(), spec, input),
        Program::External(cmd) => external::run(cmd, spec, input)?,
    };
    Ok(ExecutionRecord {
        input: input.clone(),
        size,
        path: path_id(&raw.edges),
        edges: raw.edges,
        cost: raw.cost,
        internal_counts: raw.counts,
        status: raw.status,
    })
}

pub(crate) struct RawRun {
    pub edges: BTreeSet<u64>,
    pub counts: BTreeMap<String, u64>,
    pub cost: f64,
    pub status: Status,
}

pub(crate) fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn run_native(target: &dyn Target, spec: &TargetSpec, input: &TargetInput) -> RawRun {
    let once = || {
        let started = Instant::now();
        let mut tracer = Tracer::new(target.tag(), target.blocks(), Some(started + spec.timeout));
        let outcome = catch_unwind(AssertUnwindSafe(|| target.execute(input, &mut tracer)));
        let elapsed = started.elapsed();
        let status = match outcome {
            Ok(Ok(())) if elapsed <= spec.timeout => Status::Ok,
            Ok(_) => Status::Timeout,
            Err(_) => Status::Crash,
        };
        (tracer, status, elapsed)
    };
    let (tracer, status, elapsed) = once();
    let cost = match spec.cost_mode {
        CostMode::Lines => tracer.lines() as f64,
        CostMode::Time if status == Status::Ok => {
            let mut times = vec![elapsed.as_secs_f64() * 1e6];
            for _ in 1..spec.time_repeats {
                times.push(once().2.as_secs_f64() * 1e6);
            }
            median(times)
        }
        CostMode::Time => elapsed.as_secs_f64() * 1e6,
    };
    RawRun { edges: tracer.edges(), counts: tracer.counts(), cost, status }
}
