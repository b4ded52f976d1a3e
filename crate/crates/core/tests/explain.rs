use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use dpfuzz_core::explain::{explain, ExplainConfig, Node, Predicate, Space};
use dpfuzz_core::fuzz::{fuzz, FuzzConfig, FuzzResult};
use dpfuzz_core::harness::{
    Block, InputDomain, ParamSpec, ParamValue, Probed, Target, TargetInput, TargetSpec, Tracer,
};
use dpfuzz_core::Error;

static SWITCH_BLOCKS: &[Block] = &[
    Block::new("switch.entry", 1),
    Block::new("switch.fast", 1),
    Block::new("switch.slow", 1),
];

/// Linear work when `fast` is true, quadratic otherwise. Panics once
/// `broken` is set.
#[derive(Default)]
struct Switch {
    broken: AtomicBool,
}

impl Target for Switch {
    fn name(&self) -> &str {
        "switch"
    }
    fn tag(&self) -> u16 {
        902
    }
    fn blocks(&self) -> &'static [Block] {
        SWITCH_BLOCKS
    }
    fn domain(&self) -> InputDomain {
        InputDomain::Params {
            params: vec![ParamSpec::categorical("fast", &["false", "true"]), ParamSpec::int("n", 2, 40)],
            shape: None,
            size_field: Some("n".into()),
        }
    }
    fn execute(&self, input: &TargetInput, t: &mut Tracer) -> Probed {
        if self.broken.load(Ordering::SeqCst) {
            panic!("target is broken");
        }
        let rec = input.as_params().unwrap();
        let n = match rec.values["n"] {
            ParamValue::Int(n) => n as usize,
            _ => unreachable!(),
        };
        t.hit(0)?;
        if rec.values["fast"] == ParamValue::Cat("true".into()) {
            for _ in 0..n {
                t.hit(1)?;
            }
        } else {
            for _ in 0..n * n {
                t.hit(2)?;
            }
        }
        Ok(())
    }
}

fn run(spec: &TargetSpec, n: u64) -> FuzzResult {
    let cfg = FuzzConfig { max_iterations: n, rng_seed: 1, seeds: spec.default_seeds(), ..FuzzConfig::default() };
    fuzz(spec, &cfg).unwrap()
}

fn single_split(node: &Node) -> Option<(&str, &Predicate)> {
    match node {
        Node::Split { name, predicate, left, right, .. }
            if matches!(**left, Node::Leaf { .. }) && matches!(**right, Node::Leaf { .. }) =>
        {
            Some((name, predicate))
        }
        _ => None,
    }
}

#[test]
fn boolean_parameter_and_loop_count_explain_the_clusters() {
    let spec = TargetSpec::native(Arc::new(Switch::default()));
    let r = run(&spec, 3_000);
    assert_eq!(r.clusters.k, 2, "{:?}", r.clusters);
    let e = explain(&r, &spec, &ExplainConfig::default()).unwrap();
    let input = e.input.unwrap();
    assert_eq!(input.accuracy, 1.0);
    let (name, pred) = single_split(&input.tree.root).expect("one split");
    assert_eq!(name, "fast");
    assert!(matches!(pred, Predicate::Eq(_)));

    let internal = e.internal.unwrap();
    assert_eq!(internal.accuracy, 1.0);
    let (name, pred) = single_split(&internal.tree.root).expect("one split");
    assert!(name == "switch.fast" || name == "switch.slow", "{name}");
    assert!(matches!(pred, Predicate::Le(_)));
}

#[test]
fn parity_split_lands_on_parity_features() {
    let spec = TargetSpec::builtin("parity").unwrap();
    let r = run(&spec, 20_000);
    let e = explain(&r, &spec, &ExplainConfig::default()).unwrap();
    let input = e.input.unwrap();
    let internal = e.internal.unwrap();
    assert_eq!((input.accuracy, internal.accuracy), (1.0, 1.0));
    assert_eq!(single_split(&input.tree.root).unwrap().0, "byte0.lsb");
    assert_eq!(single_split(&internal.tree.root).unwrap().0, "parity.pairs");
}

#[test]
fn one_cluster_gives_single_leaves() {
    let spec = TargetSpec::builtin("parity").unwrap();
    let r = run(&spec, 5_000);
    let e = explain(&r, &spec, &ExplainConfig { k: Some(1), ..ExplainConfig::default() }).unwrap();
    assert_eq!(e.k, 1);
    assert!(matches!(e.input.unwrap().tree.root, Node::Leaf { .. }));
    assert!(matches!(e.internal.unwrap().tree.root, Node::Leaf { .. }));
}

#[test]
fn input_space_only_skips_reexecution() {
    let spec = TargetSpec::builtin("parity").unwrap();
    let r = run(&spec, 5_000);
    let e = explain(&r, &spec, &ExplainConfig { space: Space::Input, ..ExplainConfig::default() }).unwrap();
    assert!(e.input.is_some() && e.internal.is_none());
}

#[test]
fn mostly_failing_reexecution_is_an_error() {
    let target = Arc::new(Switch::default());
    let spec = TargetSpec::native(target.clone());
    let r = run(&spec, 1_000);
    target.broken.store(true, Ordering::SeqCst);
    let out = explain(&r, &spec, &ExplainConfig::default());
    assert!(matches!(out, Err(Error::Reexecution { .. })), "{out:?}");
}
