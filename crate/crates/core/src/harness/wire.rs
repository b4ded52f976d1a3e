//! The `DPFUZZ1` trace format written by external targets.
//!
//! ```text
//! DPFUZZ1
//! EDGE <u64>          (zero or more)
//! COUNT <name> <u64>  (zero or more, after all EDGE lines)
//! COST <u64>          (exactly one, last)
//! ```
//!
//! Names match `[A-Za-z0-9_.:]+`. A final newline is optional.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub const HEADER: &str = "DPFUZZ1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace line {line}: {message}")]
pub struct WireError {
    pub line: usize,
    pub message: String,
}

/// What an external execution reported.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceFragment {
    pub edges: BTreeSet<u64>,
    pub counts: BTreeMap<String, u64>,
    pub cost: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Edges,
    Counts,
    Done,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || b == b':')
}

fn number(tok: &str, line: usize) -> Result<u64, WireError> {
    // u64::from_str accepts a leading '+', the grammar does not
    if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(line, format!("`{tok}` is not an unsigned integer")));
    }
    tok.parse::<u64>()
        .map_err(|_| err(line, format!("`{tok}` does not fit in 64 bits")))
}

fn err(line: usize, message: impl Into<String>) -> WireError {
    WireError { line, message: message.into() }
}

/// Parses a complete trace. Returns the fragment or the first violation.
pub fn parse_trace(stream: &[u8]) -> Result<TraceFragment, WireError> {
    let mut partial = TraceFragment::default();
    parse_into(stream, &mut partial)?;
    Ok(partial)
}

/// Parses as much as possible; used for crashed targets whose trace may be
/// cut short. Returns the partial fragment and the error, if any.
pub fn parse_partial(stream: &[u8]) -> (TraceFragment, Option<WireError>) {
    let mut partial = TraceFragment::default();
    let e = parse_into(stream, &mut partial).err();
    (partial, e)
}

fn parse_into(stream: &[u8], out: &mut TraceFragment) -> Result<(), WireError> {
    let text = std::str::from_utf8(stream).map_err(|e| {
        let line = stream[..e.valid_up_to()].iter().filter(|b| **b == b'\n').count() + 1;
        err(line, "invalid UTF-8")
    })?;
    let body = text.strip_suffix('\n').unwrap_or(text);
    let lines: Vec<&str> = if body.is_empty() && text.is_empty() {
        Vec::new()
    } else {
        body.split('\n').collect()
    };
    match lines.first() {
        Some(&HEADER) => {}
        _ => return Err(err(1, format!("missing `{HEADER}` header"))),
    }
    let mut section = Section::Edges;
    for (idx, raw) in lines.iter().enumerate().skip(1) {
        let line = idx + 1;
        if section == Section::Done {
            return Err(err(line, "content after COST footer"));
        }
        let toks: Vec<&str> = raw.split(' ').collect();
        match toks.as_slice() {
            ["EDGE", id] => {
                if section > Section::Edges {
                    return Err(err(line, "EDGE after COUNT section"));
                }
                out.edges.insert(number(id, line)?);
            }
            ["COUNT", name, value] => {
                if !valid_name(name) {
                    return Err(err(line, format!("invalid COUNT name `{name}`")));
                }
                let value = number(value, line)?;
                if out.counts.insert(name.to_string(), value).is_some() {
                    return Err(err(line, format!("duplicate COUNT `{name}`")));
                }
                section = Section::Counts;
            }
            ["COST", value] => {
                out.cost = Some(number(value, line)?);
                section = Section::Done;
            }
            _ => return Err(err(line, format!("unrecognized directive `{raw}`"))),
        }
    }
    if section != Section::Done {
        return Err(err(lines.len() + 1, "missing COST footer"));
    }
    Ok(())
}

/// Renders a fragment in canonical form.
pub fn write_trace(edges: &BTreeSet<u64>, counts: &BTreeMap<String, u64>, cost: u64) -> String {
    let mut s = String::from(HEADER);
    s.push('\n');
    for e in edges {
        s.push_str(&format!("EDGE {e}\n"));
    }
    for (k, v) in counts {
        s.push_str(&format!("COUNT {k} {v}\n"));
    }
    s.push_str(&format!("COST {cost}\n"));
    s
}
