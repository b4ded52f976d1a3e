//! `dpfuzz`: differential performance fuzzing from the command line.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dpfuzz_core::explain::{explain, ExplainConfig, Space, TreeConfig};
use dpfuzz_core::fuzz::{fuzz, FuzzConfig, Policy, DEFAULT_CLUSTER_INTERVAL, DEFAULT_ITERATIONS, DEFAULT_TARGET_CLUSTERS};
use dpfuzz_core::harness::{CostMode, InputDomain, TargetSpec};
use dpfuzz_core::report::{
    aggregate, metrics_csv, predicates_text, save_explanation, Aggregate, MetricsConfig, MetricsRow, RunBundle,
    TargetDescriptor,
};

#[derive(Parser, Debug)]
#[command(name = "dpfuzz", version, about = "Differential performance fuzzing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fuzz one target and save a run bundle.
    Fuzz(FuzzCmd),
    /// Run all three policies on one target and print a comparison table.
    Compare(CompareCmd),
    /// Learn decision trees that separate the clusters of a saved run.
    Explain(ExplainCmd),
    /// Recompute metrics, functions.csv and the plot of a saved run.
    Report(ReportCmd),
}

#[derive(Args, Debug)]
struct TargetArgs {
    /// Built-in target name.
    #[arg(long, required_unless_present = "external_cmd", conflicts_with = "external_cmd")]
    target: Option<String>,
    /// Shell command speaking the DPFUZZ1 trace protocol.
    #[arg(long)]
    external_cmd: Option<String>,
    /// Minimum payload length for external targets.
    #[arg(long, default_value_t = 0)]
    min_len: usize,
    /// Maximum payload length for external targets.
    #[arg(long, default_value_t = 64)]
    max_len: usize,
    #[arg(long, value_enum, default_value_t = CostModeArg::Lines)]
    cost_mode: CostModeArg,
    /// Per-execution timeout.
    #[arg(long, default_value_t = 900.0)]
    timeout_secs: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CostModeArg {
    Lines,
    Time,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Dpfuzz,
    Slowfuzz,
    Perffuzz,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Dpfuzz => Policy::DpFuzz,
            PolicyArg::Slowfuzz => Policy::SlowFuzz,
            PolicyArg::Perffuzz => Policy::PerfFuzz,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpaceArg {
    Input,
    Internal,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportArg {
    Best,
    Median,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Wall-clock budget for one fuzzing run.
    #[arg(long, default_value_t = 600.0)]
    budget_secs: f64,
    /// Maximum loop iterations (N).
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: u64,
    /// Within-cluster tolerance; derived from the data when omitted.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Separation bound; 4 × epsilon when omitted.
    #[arg(long)]
    sigma: Option<f64>,
    /// Stop once this many separated clusters exist.
    #[arg(long, default_value_t = DEFAULT_TARGET_CLUSTERS)]
    k: usize,
    /// Steps between clusterings (M).
    #[arg(long, default_value_t = DEFAULT_CLUSTER_INTERVAL)]
    cluster_interval: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Executions per batch; above 1 runs batches in parallel.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Elbow-rule threshold for #K.
    #[arg(long)]
    elbow_threshold: Option<f64>,
}

#[derive(Args, Debug)]
struct FuzzCmd {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value_t = PolicyArg::Dpfuzz)]
    policy: PolicyArg,
    /// Bundle directory.
    #[arg(long, default_value = "dpfuzz-run")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompareCmd {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Repetitions per policy; repetition r uses seed + r.
    #[arg(long, default_value_t = 1)]
    repeat: u64,
    /// How repetitions are folded into one row.
    #[arg(long, value_enum, default_value_t = ReportArg::Best)]
    report: ReportArg,
    /// Directory for compare.csv and per-run bundles.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExplainCmd {
    /// Bundle directory written by `fuzz`.
    #[arg(long)]
    run: PathBuf,
    /// Re-cluster into this many clusters first.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = SpaceArg::Both)]
    space: SpaceArg,
    #[arg(long, default_value_t = TreeConfig::default().max_depth)]
    max_depth: usize,
    #[arg(long, default_value_t = TreeConfig::default().min_leaf)]
    min_leaf: usize,
    /// Output directory; defaults to the bundle.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportCmd {
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    elbow_threshold: Option<f64>,
}

fn build_spec(t: &TargetArgs) -> Result<TargetSpec> {
    if !(t.timeout_secs > 0.0 && t.timeout_secs.is_finite()) {
        bail!("--timeout-secs must be positive");
    }
    let spec = match (&t.target, &t.external_cmd) {
        (Some(name), None) => TargetSpec::builtin(name)?,
        (None, Some(cmd)) => TargetSpec::external(cmd.clone(), InputDomain::bytes(t.min_len, t.max_len)),
        _ => bail!("give exactly one of --target and --external-cmd"),
    };
    let mode = match t.cost_mode {
        CostModeArg::Lines => CostMode::Lines,
        CostModeArg::Time => CostMode::Time,
    };
    let spec = spec.with_cost_mode(mode).with_timeout(Duration::from_secs_f64(t.timeout_secs));
    spec.validate()?;
    Ok(spec)
}

fn build_config(spec: &TargetSpec, s: &SearchArgs, policy: Policy, seed: u64) -> Result<FuzzConfig> {
    if !(s.budget_secs >= 0.0 && s.budget_secs.is_finite()) {
        bail!("--budget-secs must be a nonnegative number");
    }
    let config = FuzzConfig {
        max_iterations: s.iterations,
        cluster_interval: s.cluster_interval,
        epsilon: s.epsilon,
        sigma: s.sigma,
        target_clusters: s.k,
        time_budget: Some(Duration::from_secs_f64(s.budget_secs)),
        rng_seed: seed,
        policy,
        seeds: spec.default_seeds(),
        workers: s.workers,
        ..FuzzConfig::default()
    };
    config.validate()?;
    Ok(config)
}

fn metrics_config(s: &SearchArgs, seed: u64) -> MetricsConfig {
    MetricsConfig { elbow_threshold: s.elbow_threshold, seed, ..MetricsConfig::default() }
}

fn run_one(spec: &TargetSpec, config: FuzzConfig) -> Result<(RunBundle, f64)> {
    let started = Instant::now();
    let result = fuzz(spec, &config)?;
    let wall = started.elapsed().as_secs_f64();
    Ok((RunBundle::new(spec, config, result), wall))
}

fn cmd_fuzz(c: FuzzCmd) -> Result<()> {
    let spec = build_spec(&c.target)?;
    let config = build_config(&spec, &c.search, c.policy.into(), c.search.seed)?;
    let (bundle, wall) = run_one(&spec, config)?;
    let row = bundle
        .save(&c.out, wall, &metrics_config(&c.search, c.search.seed))
        .with_context(|| format!("saving bundle to {}", c.out.display()))?;
    let r = &bundle.result;
    if r.crashes + r.timeouts > 0 {
        eprintln!("{} crashing and {} timed-out executions (see results.json)", r.crashes, r.timeouts);
    }
    println!("{row}");
    Ok(())
}

fn cmd_compare(c: CompareCmd) -> Result<()> {
    if c.repeat == 0 {
        bail!("--repeat must be at least 1");
    }
    let spec = build_spec(&c.target)?;
    let how = match c.report {
        ReportArg::Best => Aggregate::Best,
        ReportArg::Median => Aggregate::Median,
    };
    let name = TargetDescriptor::from_spec(&spec).display_name();
    let mut table: Vec<MetricsRow> = Vec::new();
    for policy in Policy::ALL {
        let mut rows = Vec::new();
        for rep in 0..c.repeat {
            let seed = c.search.seed.wrapping_add(rep);
            let config = build_config(&spec, &c.search, policy, seed)?;
            let (bundle, wall) = run_one(&spec, config)?;
            let row = match &c.out {
                Some(dir) => bundle.save(&dir.join(format!("{policy}-{rep}")), wall, &metrics_config(&c.search, seed))?,
                None => bundle.metrics(wall, &metrics_config(&c.search, seed))?,
            };
            log::info!("{row}");
            rows.push(row);
        }
        let mut row = aggregate(&rows, how).expect("at least one repetition");
        row.target = name.clone();
        table.push(row);
    }
    for row in &table {
        println!("{row}");
    }
    if let Some(dir) = &c.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("compare.csv"), metrics_csv(&table)?)?;
    }
    Ok(())
}

fn cmd_explain(c: ExplainCmd) -> Result<()> {
    let bundle = RunBundle::load(&c.run)?;
    let spec = bundle.target.to_spec()?;
    let cfg = ExplainConfig {
        k: c.k,
        space: match c.space {
            SpaceArg::Input => Space::Input,
            SpaceArg::Internal => Space::Internal,
            SpaceArg::Both => Space::Both,
        },
        tree: TreeConfig { max_depth: c.max_depth, min_leaf: c.min_leaf },
        seed: bundle.config.rng_seed,
    };
    let e = explain(&bundle.result, &spec, &cfg)?;
    let out = c.out.unwrap_or(c.run);
    std::fs::create_dir_all(&out)?;
    save_explanation(&out, &e)?;
    print!("{}", predicates_text(&e));
    Ok(())
}

fn cmd_report(c: ReportCmd) -> Result<()> {
    let bundle = RunBundle::load(&c.run)?;
    let cfg = MetricsConfig {
        elbow_threshold: c.elbow_threshold,
        seed: bundle.config.rng_seed,
        ..MetricsConfig::default()
    };
    let row = bundle.write_reports(&c.run, &cfg)?;
    println!("{row}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fuzz(c) => cmd_fuzz(c),
        Command::Compare(c) => cmd_compare(c),
        Command::Explain(c) => cmd_explain(c),
        Command::Report(c) => cmd_report(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
