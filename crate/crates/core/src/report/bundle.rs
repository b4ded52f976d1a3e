use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{compute_metrics, emit_plot, functions_csv, metrics_csv, MetricsConfig, MetricsRow};
use crate::explain::Explanation;
use crate::fuzz::{coverage_grid, FuzzConfig, FuzzResult};
use crate::harness::{targets, CostMode, InputDomain, Program, TargetSpec};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const RESULTS_FILE: &str = "results.json";
pub const FUNCTIONS_FILE: &str = "functions.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const PLOT_FILE: &str = "clusters.svg";
pub const TREES_FILE: &str = "trees.json";
pub const PREDICATES_FILE: &str = "predicates.txt";
pub const TIMING_FILE: &str = "timing.json";

/// Enough of a [`TargetSpec`] to rebuild it later.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetDescriptor {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_cmd: Option<String>,
    pub domain: InputDomain,
    pub cost_mode: CostMode,
    pub timeout_secs: f64,
    pub time_repeats: usize,
}

impl TargetDescriptor {
    pub fn from_spec(spec: &TargetSpec) -> Self {
        TargetDescriptor {
            name: spec.name.clone(),
            external_cmd: match &spec.program {
                Program::External(c) => Some(c.command.clone()),
                Program::Native(_) => None,
            },
            domain: spec.domain.clone(),
            cost_mode: spec.cost_mode,
            timeout_secs: spec.timeout.as_secs_f64(),
            time_repeats: spec.time_repeats,
        }
    }

    pub fn to_spec(&self) -> Result<TargetSpec> {
        let mut spec = match &self.external_cmd {
            Some(cmd) => TargetSpec::external(cmd.clone(), self.domain.clone()),
            None => TargetSpec::builtin(&self.name)?,
        };
        spec.cost_mode = self.cost_mode;
        spec.timeout = Duration::from_secs_f64(self.timeout_secs);
        spec.time_repeats = self.time_repeats;
        Ok(spec)
    }

    /// Table name: the benchmark's display name, or the raw name.
    pub fn display_name(&self) -> String {
        match self.external_cmd {
            Some(_) => self.name.clone(),
            None => targets::display_name(&self.name).to_string(),
        }
    }
}

/// A saved run: everything later subcommands need, without timing data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunBundle {
    pub dpfuzz_schema: u32,
    pub target: TargetDescriptor,
    pub config: FuzzConfig,
    pub result: FuzzResult,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct Timing {
    wall_secs: f64,
}

fn bundle_err(path: &Path, reason: impl ToString) -> Error {
    Error::Bundle { path: path.to_path_buf(), reason: reason.to_string() }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| bundle_err(&path, e))?;
    Ok(path)
}

impl RunBundle {
    pub fn new(spec: &TargetSpec, config: FuzzConfig, result: FuzzResult) -> Self {
        RunBundle { dpfuzz_schema: SCHEMA_VERSION, target: TargetDescriptor::from_spec(spec), config, result }
    }

    pub fn metrics(&self, wall_secs: f64, cfg: &MetricsConfig) -> Result<MetricsRow> {
        compute_metrics(&self.result, &self.target.display_name(), self.target.cost_mode, wall_secs, cfg)
    }

    /// Writes `results.json`, the timing file, and all derived reports.
    pub fn save(&self, dir: &Path, wall_secs: f64, cfg: &MetricsConfig) -> Result<MetricsRow> {
        fs::create_dir_all(dir).map_err(|e| bundle_err(dir, e))?;
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        write(dir, RESULTS_FILE, &json)?;
        write(dir, TIMING_FILE, &serde_json::to_string(&Timing { wall_secs })?)?;
        self.write_reports(dir, cfg)
    }

    /// Regenerates `functions.csv`, `metrics.csv` and `clusters.svg`.
    pub fn write_reports(&self, dir: &Path, cfg: &MetricsConfig) -> Result<MetricsRow> {
        let row = self.metrics(read_wall_secs(dir), cfg)?;
        write(dir, FUNCTIONS_FILE, &functions_csv(&self.result)?)?;
        write(dir, METRICS_FILE, &metrics_csv(std::slice::from_ref(&row))?)?;
        let grid = coverage_grid(&self.result.coverage);
        write(dir, PLOT_FILE, &emit_plot(&self.result.functions, &self.result.clusters, &grid))?;
        Ok(row)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(RESULTS_FILE);
        let text = fs::read_to_string(&path).map_err(|e| bundle_err(&path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bundle_err(&path, e))?;
        match value.get("dpfuzz_schema").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(bundle_err(&path, format!("unsupported schema version {v}"))),
            None => return Err(bundle_err(&path, "missing dpfuzz_schema field")),
        }
        serde_json::from_value(value).map_err(|e| bundle_err(&path, e))
    }
}

fn read_wall_secs(dir: &Path) -> f64 {
    fs::read_to_string(dir.join(TIMING_FILE))
        .ok()
        .and_then(|s| serde_json::from_str::<Timing>(&s).ok())
        .map_or(0.0, |t| t.wall_secs)
}

/// One implication per leaf, grouped by feature space.
pub fn predicates_text(e: &Explanation) -> String {
    let mut out = String::new();
    for (space, report) in [("input", &e.input), ("internal", &e.internal)] {
        let Some(r) = report else { continue };
        let _ = writeln!(out, "# {space} space: accuracy {:.3} over {} rows", r.accuracy, r.rows);
        for (label, conjs) in &r.predicates {
            for c in conjs {
                let _ = writeln!(
                    out,
                    "{c} => cluster {label} (purity {:.3}, support {})",
                    c.purity, c.support
                );
            }
        }
    }
    out
}

/// Writes `trees.json` and `predicates.txt`.
pub fn save_explanation(dir: &Path, e: &Explanation) -> Result<()> {
    let mut json = serde_json::to_string_pretty(e)?;
    json.push('\n');
    write(dir, TREES_FILE, &json)?;
    write(dir, PREDICATES_FILE, &predicates_text(e))?;
    Ok(())
}
