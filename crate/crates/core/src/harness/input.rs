//! Program inputs and their domains.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A value of one typed parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamValue {
    Cat(String),
    Int(i64),
    Real(f64),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Cat(s) => write!(f, "'{s}'"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Real(r) => write!(f, "{r}"),
        }
    }
}

/// Data shape attached to a parameter record (e.g. a training matrix).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub samples: u64,
    pub features: u64,
}

/// A record of named, typed parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub values: BTreeMap<String, ParamValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
}

/// One program input: either raw bytes or a typed parameter record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetInput {
    Bytes {
        #[serde(with = "hex")]
        data: Vec<u8>,
    },
    Params(ParamRecord),
}

impl TargetInput {
    pub fn bytes(data: impl Into<Vec<u8>>) -> Self {
        TargetInput::Bytes { data: data.into() }
    }

    pub fn as_bytes(&self) -> Option<&[u8]> {
        match self {
            TargetInput::Bytes { data } => Some(data),
            TargetInput::Params(_) => None,
        }
    }

    pub fn as_params(&self) -> Option<&ParamRecord> {
        match self {
            TargetInput::Params(p) => Some(p),
            TargetInput::Bytes { .. } => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TargetInput::Bytes { .. } => "bytes",
            TargetInput::Params(_) => "params",
        }
    }
}

/// How the size `|x|` of an input is measured.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeMeasure {
    /// Length of a byte payload.
    ByteLength,
    /// `samples × features` of the attached data shape.
    Shape,
    /// Value of a declared integer parameter.
    Field(String),
}

/// Size of `input` under `measure`.
///
/// Byte payloads always measure their length and shaped records always
/// measure `samples × features`; `measure` only matters for records without a
/// shape, where it names the scalar size field.
pub fn input_size(input: &TargetInput, measure: &SizeMeasure) -> u64 {
    match input {
        TargetInput::Bytes { data } => data.len() as u64,
        TargetInput::Params(rec) => {
            if let Some(shape) = rec.shape {
                return shape.samples.saturating_mul(shape.features);
            }
            match measure {
                SizeMeasure::Field(name) => match rec.values.get(name) {
                    Some(ParamValue::Int(v)) => (*v).max(0) as u64,
                    Some(ParamValue::Real(v)) if *v > 0.0 => *v as u64,
                    _ => 0,
                },
                _ => 0,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Categorical(Vec<String>),
    Int { min: i64, max: i64 },
    Real { min: f64, max: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
}

impl ParamSpec {
    pub fn categorical(name: &str, values: &[&str]) -> Self {
        ParamSpec {
            name: name.to_string(),
            kind: ParamKind::Categorical(values.iter().map(|s| s.to_string()).collect()),
        }
    }

    pub fn int(name: &str, min: i64, max: i64) -> Self {
        ParamSpec { name: name.to_string(), kind: ParamKind::Int { min, max } }
    }

    pub fn real(name: &str, min: f64, max: f64) -> Self {
        ParamSpec { name: name.to_string(), kind: ParamKind::Real { min, max } }
    }

    pub fn contains(&self, value: &ParamValue) -> bool {
        match (&self.kind, value) {
            (ParamKind::Categorical(set), ParamValue::Cat(v)) => set.contains(v),
            (ParamKind::Int { min, max }, ParamValue::Int(v)) => min <= v && v <= max,
            (ParamKind::Real { min, max }, ParamValue::Real(v)) => {
                v.is_finite() && *min <= *v && *v <= *max
            }
            _ => false,
        }
    }

    /// Nearest in-domain value; categorical strays snap to the first value.
    pub fn clamp(&self, value: &ParamValue) -> ParamValue {
        match (&self.kind, value) {
            (ParamKind::Categorical(set), ParamValue::Cat(v)) if set.contains(v) => value.clone(),
            (ParamKind::Categorical(set), _) => ParamValue::Cat(set[0].clone()),
            (ParamKind::Int { min, max }, ParamValue::Int(v)) => ParamValue::Int((*v).clamp(*min, *max)),
            (ParamKind::Int { min, max }, ParamValue::Real(v)) => {
                ParamValue::Int((v.round() as i64).clamp(*min, *max))
            }
            (ParamKind::Real { min, max }, ParamValue::Real(v)) if v.is_finite() => {
                ParamValue::Real(v.clamp(*min, *max))
            }
            (ParamKind::Real { min, max }, ParamValue::Int(v)) => {
                ParamValue::Real((*v as f64).clamp(*min, *max))
            }
            (ParamKind::Real { min, .. }, _) => ParamValue::Real(*min),
            (ParamKind::Int { min, .. }, _) => ParamValue::Int(*min),
        }
    }
}

/// Inclusive bounds for a data shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeBounds {
    pub samples: (u64, u64),
    pub features: (u64, u64),
}

/// The set of inputs a target accepts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputDomain {
    Bytes {
        min_len: usize,
        max_len: usize,
    },
    Params {
        params: Vec<ParamSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shape: Option<ShapeBounds>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size_field: Option<String>,
    },
}

impl InputDomain {
    pub fn bytes(min_len: usize, max_len: usize) -> Self {
        InputDomain::Bytes { min_len, max_len }
    }

    pub fn size_measure(&self) -> SizeMeasure {
        match self {
            InputDomain::Bytes { .. } => SizeMeasure::ByteLength,
            InputDomain::Params { shape: Some(_), .. } => SizeMeasure::Shape,
            InputDomain::Params { size_field: Some(f), .. } => SizeMeasure::Field(f.clone()),
            InputDomain::Params { .. } => SizeMeasure::Shape,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InputDomain::Bytes { min_len, max_len } if min_len > max_len => Err(Error::Config(
                format!("byte length bounds {min_len}..={max_len} are inverted"),
            )),
            InputDomain::Bytes { .. } => Ok(()),
            InputDomain::Params { params, shape, size_field } => {
                if params.is_empty() && shape.is_none() {
                    return Err(Error::Config("parameter domain declares nothing".into()));
                }
                for p in params {
                    let ok = match &p.kind {
                        ParamKind::Categorical(set) => !set.is_empty(),
                        ParamKind::Int { min, max } => min <= max,
                        ParamKind::Real { min, max } => min.is_finite() && max.is_finite() && min <= max,
                    };
                    if !ok {
                        return Err(Error::Config(format!("parameter `{}` has an empty domain", p.name)));
                    }
                }
                if let Some(b) = shape {
                    if b.samples.0 > b.samples.1 || b.features.0 > b.features.1 {
                        return Err(Error::Config("shape bounds are inverted".into()));
                    }
                }
                if shape.is_none() {
                    let Some(field) = size_field else {
                        return Err(Error::Config("record domain needs a shape or a size field".into()));
                    };
                    let ok = params
                        .iter()
                        .any(|p| &p.name == field && matches!(p.kind, ParamKind::Int { .. }));
                    if !ok {
                        return Err(Error::Config(format!("size field `{field}` is not an integer parameter")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Checks that `input` lies inside the domain.
    pub fn check(&self, input: &TargetInput) -> Result<()> {
        match (self, input) {
            (InputDomain::Bytes { min_len, max_len }, TargetInput::Bytes { data }) => {
                if data.len() < *min_len || data.len() > *max_len {
                    return Err(Error::Domain(format!(
                        "payload length {} outside {min_len}..={max_len}",
                        data.len()
                    )));
                }
                Ok(())
            }
            (InputDomain::Params { params, shape, .. }, TargetInput::Params(rec)) => {
                if rec.values.len() != params.len() {
                    return Err(Error::Domain(format!(
                        "record has {} fields, domain declares {}",
                        rec.values.len(),
                        params.len()
                    )));
                }
                for p in params {
                    match rec.values.get(&p.name) {
                        Some(v) if p.contains(v) => {}
                        Some(v) => {
                            return Err(Error::Domain(format!("`{}` = {v} outside its domain", p.name)))
                        }
                        None => return Err(Error::Domain(format!("missing field `{}`", p.name))),
                    }
                }
                match (shape, rec.shape) {
                    (None, None) => Ok(()),
                    (Some(b), Some(s)) => {
                        let inside = |v: u64, (lo, hi): (u64, u64)| lo <= v && v <= hi;
                        if inside(s.samples, b.samples) && inside(s.features, b.features) {
                            Ok(())
                        } else {
                            Err(Error::Domain(format!(
                                "shape {}x{} outside bounds",
                                s.samples, s.features
                            )))
                        }
                    }
                    (Some(_), None) => Err(Error::Domain("record lacks a data shape".into())),
                    (None, Some(_)) => Err(Error::Domain("domain does not take a data shape".into())),
                }
            }
            (_, other) => Err(Error::Domain(format!("{} payload for a mismatched domain", other.kind_name()))),
        }
    }

    /// Forces `input` back into the domain.
    ///
    /// Byte payloads are truncated to `max_len` and padded with `fill` up to
    /// `min_len`; record fields are clamped field by field.
    pub fn clamp(&self, input: TargetInput, fill: &mut dyn FnMut() -> u8) -> TargetInput {
        match (self, input) {
            (InputDomain::Bytes { min_len, max_len }, TargetInput::Bytes { mut data }) => {
                data.truncate(*max_len);
                while data.len() < *min_len {
                    data.push(fill());
                }
                TargetInput::Bytes { data }
            }
            (InputDomain::Params { params, shape, .. }, TargetInput::Params(rec)) => {
                let mut values = BTreeMap::new();
                for p in params {
                    let v = match rec.values.get(&p.name) {
                        Some(v) => p.clamp(v),
                        None => p.clamp(&ParamValue::Int(0)),
                    };
                    values.insert(p.name.clone(), v);
                }
                let shape = shape.map(|b| {
                    let s = rec.shape.unwrap_or(Shape { samples: b.samples.0, features: b.features.0 });
                    Shape {
                        samples: s.samples.clamp(b.samples.0, b.samples.1),
                        features: s.features.clamp(b.features.0, b.features.1),
                    }
                });
                TargetInput::Params(ParamRecord { values, shape })
            }
            (_, other) => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_sizes() {
        let m = SizeMeasure::ByteLength;
        assert_eq!(input_size(&TargetInput::bytes(vec![1; 7]), &m), 7);
        assert_eq!(input_size(&TargetInput::bytes(vec![]), &m), 0);
    }

    #[test]
    fn shaped_size_is_samples_times_features() {
        let rec = ParamRecord {
            values: BTreeMap::new(),
            shape: Some(Shape { samples: 10, features: 3 }),
        };
        assert_eq!(input_size(&TargetInput::Params(rec), &SizeMeasure::Shape), 30);
    }

    #[test]
    fn scalar_size_field() {
        let mut values = BTreeMap::new();
        values.insert("n".to_string(), ParamValue::Int(12));
        values.insert("mode".to_string(), ParamValue::Cat("a".into()));
        let input = TargetInput::Params(ParamRecord { values, shape: None });
        assert_eq!(input_size(&input, &SizeMeasure::Field("n".into())), 12);
    }

    #[test]
    fn domain_checks_and_clamps() {
        let d = InputDomain::Params {
            params: vec![ParamSpec::categorical("solver", &["a", "b"]), ParamSpec::real("tol", 0.0, 1.0)],
            shape: Some(ShapeBounds { samples: (1, 10), features: (1, 4) }),
            size_field: None,
        };
        d.validate().unwrap();
        let mut values = BTreeMap::new();
        values.insert("solver".to_string(), ParamValue::Cat("z".into()));
        values.insert("tol".to_string(), ParamValue::Real(3.0));
        let bad = TargetInput::Params(ParamRecord { values, shape: Some(Shape { samples: 50, features: 0 }) });
        assert!(d.check(&bad).is_err());
        let fixed = d.clamp(bad, &mut || 0);
        d.check(&fixed).unwrap();
        let rec = fixed.as_params().unwrap();
        assert_eq!(rec.values["tol"], ParamValue::Real(1.0));
        assert_eq!(rec.shape, Some(Shape { samples: 10, features: 1 }));
    }

    #[test]
    fn inverted_byte_bounds_rejected() {
        assert!(InputDomain::bytes(5, 2).validate().is_err());
        let d = InputDomain::bytes(2, 4);
        assert!(d.check(&TargetInput::bytes(vec![1])).is_err());
        let clamped = d.clamp(TargetInput::bytes(vec![1, 2, 3, 4, 5, 6]), &mut || 9);
        assert_eq!(clamped.as_bytes().unwrap(), &[1, 2, 3, 4]);
        let padded = d.clamp(TargetInput::bytes(vec![]), &mut || 9);
        assert_eq!(padded.as_bytes().unwrap(), &[9, 9]);
    }
}
