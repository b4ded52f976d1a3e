use std::time::Duration;

use dpfuzz_core::harness::wire::{parse_partial, parse_trace, write_trace};
use dpfuzz_core::harness::{run_instrumented, CostMode, InputDomain, Status, TargetInput, TargetSpec};
use proptest::prelude::*;

fn spec(cmd: &str) -> TargetSpec {
    TargetSpec::external(cmd, InputDomain::bytes(0, 16)).with_timeout(Duration::from_secs(5))
}

#[test]
fn spec_examples() {
    let t = parse_trace(b"DPFUZZ1\nEDGE 3\nEDGE 7\nCOST 42\n").unwrap();
    assert_eq!(t.edges.into_iter().collect::<Vec<_>>(), vec![3, 7]);
    assert_eq!(t.cost, Some(42));
    let t = parse_trace(b"DPFUZZ1\nCOST 0\n").unwrap();
    assert!(t.edges.is_empty());
    assert_eq!(t.cost, Some(0));
    assert_eq!(parse_trace(b"EDGE 3\nCOST 1\n").unwrap_err().line, 1);
}

#[test]
fn truncated_trace_keeps_what_was_read() {
    let (t, e) = parse_partial(b"DPFUZZ1\nEDGE 1\nCOUNT a 2\n");
    assert_eq!(e.unwrap().line, 4);
    assert!(t.edges.contains(&1));
    assert_eq!(t.counts["a"], 2);
}

proptest! {
    #[test]
    fn written_traces_parse_back(
        edges in prop::collection::btree_set(any::<u64>(), 0..20),
        counts in prop::collection::btree_map("[A-Za-z0-9_.:]{1,8}", any::<u64>(), 0..6),
        cost in any::<u64>(),
    ) {
        let t = parse_trace(write_trace(&edges, &counts, cost).as_bytes()).unwrap();
        prop_assert_eq!(t.edges, edges);
        prop_assert_eq!(t.counts, counts);
        prop_assert_eq!(t.cost, Some(cost));
    }
}

#[test]
fn shell_target_reports_its_trace() {
    // cost = input length, one edge per distinct first byte class
    let cmd = r#"n=$(wc -c | tr -d ' '); printf 'DPFUZZ1\nEDGE 1\nEDGE %s\nCOUNT bytes %s\nCOST %s\n' $((n > 3)) "$n" "$n" > "$DPFUZZ_TRACE_FILE""#;
    let s = spec(cmd);
    let short = run_instrumented(&s, &TargetInput::bytes(vec![1, 2])).unwrap();
    let long = run_instrumented(&s, &TargetInput::bytes(vec![1, 2, 3, 4, 5])).unwrap();
    assert_eq!(short.status, Status::Ok);
    assert_eq!(short.cost, 2.0);
    assert_eq!(long.cost, 5.0);
    assert_eq!(long.internal_counts["bytes"], 5);
    assert_ne!(short.path, long.path);
    assert_eq!(short.size, 2);
}

#[test]
fn failing_command_is_a_crash() {
    let s = spec(r#"printf 'DPFUZZ1\nEDGE 9\n' > "$DPFUZZ_TRACE_FILE"; exit 3"#);
    let rec = run_instrumented(&s, &TargetInput::bytes(vec![])).unwrap();
    assert_eq!(rec.status, Status::Crash);
    assert!(rec.edges.contains(&9));
}

#[test]
fn slow_command_times_out() {
    let s = spec("sleep 10").with_timeout(Duration::from_millis(300));
    let rec = run_instrumented(&s, &TargetInput::bytes(vec![])).unwrap();
    assert_eq!(rec.status, Status::Timeout);
}

#[test]
fn malformed_trace_counts_as_a_crash() {
    let s = spec(r#"printf 'DPFUZZ1\nEDGE 4\nCOST x\n' > "$DPFUZZ_TRACE_FILE""#);
    let rec = run_instrumented(&s, &TargetInput::bytes(vec![])).unwrap();
    assert_eq!(rec.status, Status::Crash);
    assert!(rec.edges.contains(&4));
}

#[test]
fn wall_clock_mode_reports_microseconds() {
    let s = spec(r#"printf 'DPFUZZ1\nCOST 1\n' > "$DPFUZZ_TRACE_FILE""#).with_cost_mode(CostMode::Time);
    let rec = run_instrumented(&s, &TargetInput::bytes(vec![])).unwrap();
    assert_eq!(rec.status, Status::Ok);
    assert!(rec.cost > 0.0 && rec.cost < 5e6);
}
