use std::fs;

use dpfuzz_core::fuzz::{fuzz, FuzzConfig, Policy};
use dpfuzz_core::harness::TargetSpec;
use dpfuzz_core::model::{ClusterSet, Grid};
use dpfuzz_core::report::{emit_plot, MetricsConfig, RunBundle};
use serde_json::Value;

fn bundle(target: &str, policy: Policy, n: u64) -> RunBundle {
    let spec = TargetSpec::builtin(target).unwrap();
    let cfg = FuzzConfig { max_iterations: n, rng_seed: 5, policy, seeds: spec.default_seeds(), ..FuzzConfig::default() };
    let result = fuzz(&spec, &cfg).unwrap();
    RunBundle::new(&spec, cfg, result)
}

#[test]
fn metric_rows_respect_inclusions() {
    for target in ["insertionx", "quicksort", "binarysearch", "bstinsert"] {
        for policy in Policy::ALL {
            let row = bundle(target, policy, 3_000).metrics(0.0, &MetricsConfig::default()).unwrap();
            assert!(row.functions <= row.paths, "{row}");
            assert!(row.clusters <= row.functions, "{row}");
            assert!(row.samples >= 1 && row.worst > 0.0);
        }
    }
}

#[test]
fn saved_bundle_round_trips_and_reports_are_stable() {
    let b = bundle("insertionx", Policy::DpFuzz, 3_000);
    let dir = tempfile::tempdir().unwrap();
    let cfg = MetricsConfig::default();
    let row = b.save(dir.path(), 1.5, &cfg).unwrap();
    let results: Value = serde_json::from_slice(&fs::read(dir.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(results["dpfuzz_schema"], 1);
    let loaded = RunBundle::load(dir.path()).unwrap();
    assert_eq!(loaded.result, b.result);

    let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
    let before: Vec<Vec<u8>> = ["functions.csv", "metrics.csv", "clusters.svg"].iter().map(|f| read(f)).collect();
    let again = loaded.write_reports(dir.path(), &cfg).unwrap();
    let after: Vec<Vec<u8>> = ["functions.csv", "metrics.csv", "clusters.svg"].iter().map(|f| read(f)).collect();
    assert_eq!(before, after);
    assert_eq!(row, again);
}

#[test]
fn unknown_schema_is_rejected() {
    let b = bundle("insertionx", Policy::DpFuzz, 200);
    let dir = tempfile::tempdir().unwrap();
    b.save(dir.path(), 0.0, &MetricsConfig::default()).unwrap();
    let path = dir.path().join("results.json");
    let mut v: Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    v["dpfuzz_schema"] = 99.into();
    fs::write(&path, serde_json::to_vec(&v).unwrap()).unwrap();
    assert!(RunBundle::load(dir.path()).is_err());
}

#[test]
fn plot_has_one_polyline_per_function() {
    let b = bundle("insertionx", Policy::DpFuzz, 3_000);
    let r = &b.result;
    let grid = r.clusters.grid;
    let svg = emit_plot(&r.functions, &r.clusters, &grid);
    assert_eq!(svg.matches("<polyline").count(), r.functions.len());
    assert_eq!(svg, emit_plot(&r.functions, &r.clusters, &grid));
    let empty = emit_plot(&[], &ClusterSet::empty(Grid::new(1, 1, 1)), &Grid::new(1, 1, 1));
    assert!(empty.starts_with("<svg") && !empty.contains("<polyline"));
}
