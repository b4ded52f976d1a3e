//! Self-reporting external programs.
//!
//! The command runs under `sh -c`. Input bytes arrive on stdin (parameter
//! records as JSON); the program writes a `DPFUZZ1` trace to the file named by
//! `DPFUZZ_TRACE_FILE`.

use std::io::Write;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::wire::{parse_partial, parse_trace};
use super::{median, CostMode, RawRun, Status, TargetInput, TargetSpec};
use crate::{Error, Result};

pub const TRACE_ENV: &str = "DPFUZZ_TRACE_FILE";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalCommand {
    pub command: String,
}

struct Finished {
    status: Status,
    trace: Vec<u8>,
    elapsed: Duration,
}

fn stdin_bytes(input: &TargetInput) -> Result<Vec<u8>> {
    Ok(match input {
        TargetInput::Bytes { data } => data.clone(),
        TargetInput::Params(rec) => serde_json::to_vec(rec)?,
    })
}

fn run_once(cmd: &ExternalCommand, payload: &[u8], timeout: Duration) -> Result<Finished> {
    let trace_file = tempfile::NamedTempFile::new()?;
    let started = Instant::now();
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&cmd.command)
        .env(TRACE_ENV, trace_file.path())
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::External(format!("spawn `{}`: {e}", cmd.command)))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let payload = payload.to_vec();
    // a child that never reads stdin must not block us
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(&payload);
    });

    let mut backoff = Duration::from_micros(200);
    let status = loop {
        if let Some(exit) = child.try_wait()? {
            break if exit.success() { Status::Ok } else { Status::Crash };
        }
        if started.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            break Status::Timeout;
        }
        thread::sleep(backoff);
        backoff = (backoff * 2).min(Duration::from_millis(20));
    };
    let elapsed = started.elapsed();
    let _ = writer.join();
    let trace = std::fs::read(trace_file.path())?;
    Ok(Finished { status, trace, elapsed })
}

pub(crate) fn run(cmd: &ExternalCommand, spec: &TargetSpec, input: &TargetInput) -> Result<RawRun> {
    let payload = stdin_bytes(input)?;
    let first = run_once(cmd, &payload, spec.timeout)?;
    if first.status != Status::Ok {
        let (frag, _) = parse_partial(&first.trace);
        return Ok(RawRun {
            edges: frag.edges,
            counts: frag.counts,
            cost: frag.cost.unwrap_or(0) as f64,
            status: first.status,
        });
    }
    let frag = match parse_trace(&first.trace) {
        Ok(f) => f,
        Err(e) => {
            log::warn!("external target wrote a malformed trace: {e}");
            let (frag, _) = parse_partial(&first.trace);
            return Ok(RawRun { edges: frag.edges, counts: frag.counts, cost: 0.0, status: Status::Crash });
        }
    };
    let cost = match spec.cost_mode {
        CostMode::Lines => frag.cost.unwrap_or(0) as f64,
        CostMode::Time => {
            let mut times = vec![first.elapsed.as_secs_f64() * 1e6];
            for _ in 1..spec.time_repeats {
                times.push(run_once(cmd, &payload, spec.timeout)?.elapsed.as_secs_f64() * 1e6);
            }
            median(times)
        }
    };
    Ok(RawRun { edges: frag.edges, counts: frag.counts, cost, status: Status::Ok })
}
