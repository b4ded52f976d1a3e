use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fuzz::PopulationMap;
use crate::harness::{input_size, ExecutionRecord, ParamValue, PathId, SizeMeasure, TargetInput};
use crate::{Error, Result};

/// Leading bytes of a byte payload that become features.
pub const BYTE_FEATURES: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    /// The sorted set of values seen in the column.
    Categorical(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Cat(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(x) => write!(f, "{x}"),
            Value::Cat(s) => write!(f, "'{s}'"),
        }
    }
}

/// Where a row came from: a population slot, or a position in a record list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSource {
    pub path: Option<PathId>,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
    pub sources: Vec<RowSource>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Keeps the rows whose index satisfies `keep`.
    pub fn filter_rows(&self, keep: impl Fn(usize) -> bool) -> FeatureMatrix {
        let idx: Vec<usize> = (0..self.len()).filter(|i| keep(*i)).collect();
        FeatureMatrix {
            columns: self.columns.clone(),
            rows: idx.iter().map(|i| self.rows[*i].clone()).collect(),
            sources: idx.iter().map(|i| self.sources[*i]).collect(),
        }
    }
}

fn byte_row(data: &[u8]) -> Vec<Value> {
    let mut row = vec![Value::Num(data.len() as f64)];
    for i in 0..BYTE_FEATURES {
        match data.get(i) {
            Some(b) => {
                row.push(Value::Num((b & 1) as f64));
                row.push(Value::Num(*b as f64));
            }
            None => {
                row.push(Value::Num(-1.0));
                row.push(Value::Num(-1.0));
            }
        }
    }
    row
}

fn byte_columns() -> Vec<Column> {
    let mut cols = vec![Column { name: "size".into(), kind: ColumnKind::Numeric }];
    for i in 0..BYTE_FEATURES {
        cols.push(Column { name: format!("byte{i}.lsb"), kind: ColumnKind::Numeric });
        cols.push(Column { name: format!("byte{i}"), kind: ColumnKind::Numeric });
    }
    cols
}

/// Input-space features, one row per input in population order.
///
/// Typed records yield one column per parameter (sorted by name) plus `size`.
/// Byte payloads yield `size` and, for each of the first four bytes, its low
/// bit and its value (`-1` when absent).
pub fn extract_param_features(pop: &PopulationMap, measure: &SizeMeasure) -> Result<FeatureMatrix> {
    let inputs: Vec<(PathId, usize, &TargetInput)> = pop
        .paths
        .iter()
        .flat_map(|(p, v)| v.iter().enumerate().map(move |(i, x)| (*p, i, x)))
        .collect();
    let Some((_, _, first)) = inputs.first() else {
        return Err(Error::Empty("population has no inputs to explain"));
    };
    if let Some(x) = inputs.iter().find(|(_, _, x)| x.kind_name() != first.kind_name()) {
        return Err(Error::Incompatible(format!(
            "population mixes {} and {} payloads",
            first.kind_name(),
            x.2.kind_name()
        )));
    }
    let sources = inputs.iter().map(|(p, i, _)| RowSource { path: Some(*p), index: *i }).collect();
    if first.as_bytes().is_some() {
        let rows = inputs.iter().map(|(_, _, x)| byte_row(x.as_bytes().unwrap_or_default())).collect();
        return Ok(FeatureMatrix { columns: byte_columns(), rows, sources });
    }

    let records: Vec<_> = inputs.iter().filter_map(|(_, _, x)| x.as_params()).collect();
    let names: BTreeSet<&String> = records.iter().flat_map(|r| r.values.keys()).collect();
    let mut columns = Vec::new();
    for name in &names {
        let mut cats = BTreeSet::new();
        let mut numeric = false;
        for r in &records {
            match r.values.get(*name) {
                Some(ParamValue::Cat(s)) => {
                    cats.insert(s.clone());
                }
                Some(_) => numeric = true,
                None => return Err(Error::Incompatible(format!("some inputs lack parameter `{name}`"))),
            }
        }
        if numeric && !cats.is_empty() {
            return Err(Error::Incompatible(format!("parameter `{name}` mixes kinds")));
        }
        let kind = if numeric { ColumnKind::Numeric } else { ColumnKind::Categorical(cats.into_iter().collect()) };
        columns.push(Column { name: (*name).clone(), kind });
    }
    columns.push(Column { name: "size".into(), kind: ColumnKind::Numeric });
    let rows = inputs
        .iter()
        .map(|(_, _, x)| {
            let rec = x.as_params().expect("checked kind");
            let mut row: Vec<Value> = names
                .iter()
                .map(|n| match &rec.values[*n] {
                    ParamValue::Cat(s) => Value::Cat(s.clone()),
                    ParamValue::Int(i) => Value::Num(*i as f64),
                    ParamValue::Real(r) => Value::Num(*r),
                })
                .collect();
            row.push(Value::Num(input_size(x, measure) as f64));
            row
        })
        .collect();
    Ok(FeatureMatrix { columns, rows, sources })
}

/// Internal-count features: one column per count name seen in any record
/// (sorted), zero where a record lacks it. Failed runs are skipped.
pub fn extract_internal_features(records: &[ExecutionRecord]) -> Result<FeatureMatrix> {
    if records.is_empty() {
        return Err(Error::Empty("no execution records"));
    }
    let kept: Vec<usize> = (0..records.len()).filter(|i| records[*i].is_ok()).collect();
    let skipped = records.len() - kept.len();
    if skipped > 0 {
        log::info!("excluding {skipped} failed runs from internal features");
    }
    if kept.is_empty() {
        return Err(Error::Empty("no successful execution records"));
    }
    let names: BTreeSet<&String> = kept.iter().flat_map(|i| records[*i].internal_counts.keys()).collect();
    let columns = names.iter().map(|n| Column { name: (*n).clone(), kind: ColumnKind::Numeric }).collect();
    let rows = kept
        .iter()
        .map(|i| {
            let counts: &BTreeMap<String, u64> = &records[*i].internal_counts;
            names.iter().map(|n| Value::Num(counts.get(*n).copied().unwrap_or(0) as f64)).collect()
        })
        .collect();
    let sources = kept.iter().map(|i| RowSource { path: Some(records[*i].path), index: *i }).collect();
    Ok(FeatureMatrix { columns, rows, sources })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{path_id, ParamRecord, Shape, Status};

    fn record(pairs: &[(&str, u64)], status: Status) -> ExecutionRecord {
        ExecutionRecord {
            input: TargetInput::bytes(vec![]),
            size: 0,
            edges: Default::default(),
            path: path_id(&[]),
            cost: 0.0,
            internal_counts: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            status,
        }
    }

    #[test]
    fn param_projection() {
        let mut rec = ParamRecord::default();
        rec.values.insert("tol".into(), ParamValue::Real(0.1));
        rec.values.insert("solver".into(), ParamValue::Cat("saga".into()));
        rec.shape = Some(Shape { samples: 10, features: 3 });
        let mut pop = PopulationMap::default();
        pop.paths.insert(PathId(1), vec![TargetInput::Params(rec.clone()); 3]);
        let m = extract_param_features(&pop, &SizeMeasure::Shape).unwrap();
        let names: Vec<&str> = m.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["solver", "tol", "size"]);
        assert_eq!(m.len(), 3);
        assert_eq!(m.rows[0], vec![Value::Cat("saga".into()), Value::Num(0.1), Value::Num(30.0)]);
        assert!(m.rows.iter().all(|r| r == &m.rows[0]));
    }

    #[test]
    fn empty_and_mixed_populations() {
        let pop = PopulationMap::default();
        assert!(extract_param_features(&pop, &SizeMeasure::ByteLength).is_err());
        let mut pop = PopulationMap::default();
        pop.paths.insert(PathId(1), vec![TargetInput::bytes(vec![1])]);
        pop.paths.insert(PathId(2), vec![TargetInput::Params(ParamRecord::default())]);
        assert!(matches!(extract_param_features(&pop, &SizeMeasure::ByteLength), Err(Error::Incompatible(_))));
    }

    #[test]
    fn byte_features_pad_missing_bytes() {
        let mut pop = PopulationMap::default();
        pop.paths.insert(PathId(1), vec![TargetInput::bytes(vec![3, 8])]);
        let m = extract_param_features(&pop, &SizeMeasure::ByteLength).unwrap();
        assert_eq!(m.columns[1].name, "byte0.lsb");
        let nums: Vec<f64> = m.rows[0].iter().map(|v| if let Value::Num(x) = v { *x } else { f64::NAN }).collect();
        assert_eq!(nums, [2.0, 1.0, 3.0, 0.0, 8.0, -1.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn internal_union_and_imputation() {
        let recs = vec![record(&[("loopA", 14)], Status::Ok), record(&[("loopA", 2), ("condB", 1)], Status::Ok)];
        let m = extract_internal_features(&recs).unwrap();
        assert_eq!(m.columns.len(), 2);
        assert_eq!(m.columns[0].name, "condB");
        assert_eq!(m.rows[0], vec![Value::Num(0.0), Value::Num(14.0)]);
        assert_eq!(m.rows[1], vec![Value::Num(1.0), Value::Num(2.0)]);
    }

    #[test]
    fn internal_excludes_failures() {
        let recs = vec![record(&[("a", 1)], Status::Ok), record(&[("b", 1)], Status::Timeout)];
        let m = extract_internal_features(&recs).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.columns.len(), 1);
        assert!(extract_internal_features(&[]).is_err());
        assert!(extract_internal_features(&recs[1..]).is_err());
    }
}
