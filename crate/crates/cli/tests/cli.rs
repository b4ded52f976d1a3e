use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dpfuzz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpfuzz")).args(args).output().expect("spawn dpfuzz")
}

fn ok(args: &[&str]) -> String {
    let out = dpfuzz(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, f: &str) -> Vec<u8> {
    fs::read(dir.join(f)).unwrap_or_else(|e| panic!("{f}: {e}"))
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(dpfuzz(&[]).status.code(), Some(2));
    assert_eq!(dpfuzz(&["fuzz"]).status.code(), Some(2));
    assert_eq!(dpfuzz(&["fuzz", "--target", "quicksort", "--policy", "fastest"]).status.code(), Some(2));
    assert_eq!(dpfuzz(&["fuzz", "--target", "quicksort", "--external-cmd", "true"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpfuzz(&["fuzz", "--target", "nosuch", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = dpfuzz(&["report", "--run", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = dpfuzz(&["fuzz", "--target", "quicksort", "--k", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fuzz_explain_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let run_s = run.to_str().unwrap();
    let row = ok(&["fuzz", "--target", "parity", "--iterations", "5000", "--seed", "3", "--out", run_s]);
    assert!(row.starts_with("Parity | dpfuzz | #N=5004 | W="), "{row}");
    for f in ["results.json", "functions.csv", "metrics.csv", "clusters.svg", "timing.json"] {
        assert!(run.join(f).exists(), "{f}");
    }

    let first = ok(&["explain", "--run", run_s]);
    let trees = read(&run, "trees.json");
    assert!(first.contains("=> cluster"));
    assert_eq!(ok(&["explain", "--run", run_s]), first);
    assert_eq!(read(&run, "trees.json"), trees);
    assert_eq!(read(&run, "predicates.txt"), first.as_bytes());

    let files = ["functions.csv", "metrics.csv", "clusters.svg"];
    let before: Vec<_> = files.iter().map(|f| read(&run, f)).collect();
    let r1 = ok(&["report", "--run", run_s]);
    let after: Vec<_> = files.iter().map(|f| read(&run, f)).collect();
    assert_eq!(before, after);
    assert_eq!(ok(&["report", "--run", run_s]), r1);
    assert_eq!(r1, row);

    let other = dir.path().join("internal");
    ok(&["explain", "--run", run_s, "--space", "internal", "--out", other.to_str().unwrap()]);
    let text = fs::read_to_string(other.join("predicates.txt")).unwrap();
    assert!(text.starts_with("# internal space") && !text.contains("# input space"));
}

#[test]
fn compare_shares_seeds_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&[
        "compare", "--target", "insertionx", "--iterations", "2000", "--repeat", "2", "--out",
        dir.path().to_str().unwrap(),
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    for (line, p) in lines.iter().zip(["dpfuzz", "slowfuzz", "perffuzz"]) {
        assert!(line.contains(&format!("| {p} |")), "{line}");
        assert!(line.contains("#N=2004"), "{line}");
    }
    let csv = fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    for rep in 0..2 {
        assert!(dir.path().join(format!("slowfuzz-{rep}")).join("results.json").exists());
    }
}

#[test]
fn external_command_target() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("target.sh");
    // cost n² + 1 for an n-byte input
    fs::write(
        &script,
        r#"n=$(od -An -v -tu1 | tr -s ' ' '\n' | grep -c .)
{
  echo DPFUZZ1
  echo EDGE 1
  if [ "$n" -gt 0 ]; then echo EDGE 2; fi
  echo "COUNT len $n"
  echo "COST $((n * n + 1))"
} > "$DPFUZZ_TRACE_FILE"
"#,
    )
    .unwrap();
    let cmd = format!("sh {}", script.display());
    let run = dir.path().join("run");
    let row = ok(&[
        "fuzz", "--external-cmd", &cmd, "--max-len", "12", "--iterations", "60", "--timeout-secs", "10", "--out",
        run.to_str().unwrap(),
    ]);
    assert!(row.starts_with("external | dpfuzz | #N=64 | W="), "{row}");
    let w: f64 = row.split("W=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!(w >= 10.0 && w <= 145.0, "{row}");
    assert!(run.join("results.json").exists());
}
