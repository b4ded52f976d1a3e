use rand::seq::SliceRandom;
use rand::Rng;

use crate::harness::{InputDomain, ParamKind, ParamRecord, ParamSpec, ParamValue, TargetInput};
use crate::{Error, Result};

/// Mutation operators for byte payloads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ByteOp {
    BitFlip,
    ReplaceByte,
    InsertByte,
    DeleteByte,
    DuplicateBlock,
    ShuffleBlock,
    Arithmetic,
    Interesting,
}

pub const BYTE_OPS: [ByteOp; 8] = [
    ByteOp::BitFlip,
    ByteOp::ReplaceByte,
    ByteOp::InsertByte,
    ByteOp::DeleteByte,
    ByteOp::DuplicateBlock,
    ByteOp::ShuffleBlock,
    ByteOp::Arithmetic,
    ByteOp::Interesting,
];

/// Mutation operators for typed parameter records.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordOp {
    Resample,
    Perturb,
    Boundary,
    Zero,
    CopyFromPartner,
    Reset,
    ShapeIncrement,
    ShapeDecrement,
}

pub const RECORD_OPS: [RecordOp; 8] = [
    RecordOp::Resample,
    RecordOp::Perturb,
    RecordOp::Boundary,
    RecordOp::Zero,
    RecordOp::CopyFromPartner,
    RecordOp::Reset,
    RecordOp::ShapeIncrement,
    RecordOp::ShapeDecrement,
];

const MAX_BLOCK: usize = 8;
const MAX_DELTA: u64 = 35;

fn block<R: Rng + ?Sized>(len: usize, rng: &mut R) -> (usize, usize) {
    let n = rng.gen_range(1..=len.min(MAX_BLOCK));
    let start = rng.gen_range(0..=len - n);
    (start, n)
}

fn word_width<R: Rng + ?Sized>(len: usize, rng: &mut R) -> usize {
    let widths: Vec<usize> = [1, 2, 4].into_iter().filter(|w| *w <= len).collect();
    *widths.choose(rng).expect("len >= 1")
}

fn read_word(data: &[u8], at: usize, width: usize) -> u64 {
    let mut v = 0u64;
    for (i, b) in data[at..at + width].iter().enumerate() {
        v |= (*b as u64) << (8 * i);
    }
    v
}

fn write_word(data: &mut [u8], at: usize, width: usize, v: u64) {
    for i in 0..width {
        data[at + i] = (v >> (8 * i)) as u8;
    }
}

/// Applies one byte operator in place. Operators that need existing bytes
/// insert a byte instead when the payload is empty.
pub fn apply_byte_op<R: Rng + ?Sized>(op: ByteOp, data: &mut Vec<u8>, rng: &mut R) {
    let len = data.len();
    if len == 0 && op != ByteOp::InsertByte {
        return apply_byte_op(ByteOp::InsertByte, data, rng);
    }
    match op {
        ByteOp::BitFlip => {
            let i = rng.gen_range(0..len);
            data[i] ^= 1 << rng.gen_range(0..8);
        }
        ByteOp::ReplaceByte => {
            let i = rng.gen_range(0..len);
            data[i] = rng.gen();
        }
        ByteOp::InsertByte => {
            let i = rng.gen_range(0..=len);
            data.insert(i, rng.gen());
        }
        ByteOp::DeleteByte => {
            data.remove(rng.gen_range(0..len));
        }
        ByteOp::DuplicateBlock => {
            let (s, n) = block(len, rng);
            let copy = data[s..s + n].to_vec();
            let at = rng.gen_range(0..=len);
            data.splice(at..at, copy);
        }
        ByteOp::ShuffleBlock => {
            let (s, n) = block(len, rng);
            data[s..s + n].shuffle(rng);
        }
        ByteOp::Arithmetic => {
            let w = word_width(len, rng);
            let at = rng.gen_range(0..=len - w);
            let delta = rng.gen_range(1..=MAX_DELTA);
            let v = read_word(data, at, w);
            let v = if rng.gen() { v.wrapping_add(delta) } else { v.wrapping_sub(delta) };
            write_word(data, at, w, v);
        }
        ByteOp::Interesting => {
            let w = word_width(len, rng);
            let at = rng.gen_range(0..=len - w);
            let bits = 8 * w as u32;
            let v = match rng.gen_range(0..5) {
                0 => 0,
                1 => 1,
                2 => u64::MAX,
                3 => 1u64 << (bits - 1),
                _ => 1u64 << rng.gen_range(0..bits),
            };
            write_word(data, at, w, v);
        }
    }
}

fn random_value<R: Rng + ?Sized>(spec: &ParamSpec, rng: &mut R) -> ParamValue {
    match &spec.kind {
        ParamKind::Categorical(set) => ParamValue::Cat(set.choose(rng).expect("nonempty").clone()),
        ParamKind::Int { min, max } => ParamValue::Int(rng.gen_range(*min..=*max)),
        ParamKind::Real { min, max } if min < max => ParamValue::Real(rng.gen_range(*min..=*max)),
        ParamKind::Real { min, .. } => ParamValue::Real(*min),
    }
}

fn perturb<R: Rng + ?Sized>(value: &ParamValue, rng: &mut R) -> ParamValue {
    let factor = 1.0 + if rng.gen() { 1.0 } else { -1.0 } * rng.gen_range(0.0..=0.1);
    match value {
        ParamValue::Int(v) => {
            let scaled = (*v as f64 * factor).round() as i64;
            // always move at least one step
            ParamValue::Int(if scaled == *v { if factor >= 1.0 { v + 1 } else { v - 1 } } else { scaled })
        }
        ParamValue::Real(v) => ParamValue::Real(v * factor),
        other => other.clone(),
    }
}

fn boundary<R: Rng + ?Sized>(spec: &ParamSpec, rng: &mut R) -> ParamValue {
    let low = rng.gen::<bool>();
    match &spec.kind {
        ParamKind::Categorical(set) => ParamValue::Cat(if low { set[0].clone() } else { set[set.len() - 1].clone() }),
        ParamKind::Int { min, max } => ParamValue::Int(if low { *min } else { *max }),
        ParamKind::Real { min, max } => ParamValue::Real(if low { *min } else { *max }),
    }
}

fn zero(spec: &ParamSpec) -> ParamValue {
    match &spec.kind {
        ParamKind::Categorical(set) => ParamValue::Cat(set[0].clone()),
        ParamKind::Int { .. } => spec.clamp(&ParamValue::Int(0)),
        ParamKind::Real { .. } => spec.clamp(&ParamValue::Real(0.0)),
    }
}

/// Applies one record operator. Operators without a suitable field (no
/// categorical parameter, no shape, no partner) reset a random field instead.
pub fn apply_record_op<R: Rng + ?Sized>(
    op: RecordOp,
    rec: &mut ParamRecord,
    params: &[ParamSpec],
    partner: Option<&ParamRecord>,
    rng: &mut R,
) {
    let pick = |rng: &mut R, pred: &dyn Fn(&ParamSpec) -> bool| -> Option<ParamSpec> {
        let eligible: Vec<&ParamSpec> = params.iter().filter(|p| pred(p)).collect();
        eligible.choose(rng).map(|p| (*p).clone())
    };
    let numeric = |p: &ParamSpec| !matches!(p.kind, ParamKind::Categorical(_));
    let fallback = |rec: &mut ParamRecord, rng: &mut R| {
        if let Some(p) = params.choose(rng) {
            rec.values.insert(p.name.clone(), random_value(p, rng));
        }
    };
    match op {
        RecordOp::Resample => match pick(rng, &|p| matches!(p.kind, ParamKind::Categorical(_))) {
            Some(p) => {
                let v = random_value(&p, rng);
                rec.values.insert(p.name, v);
            }
            None => fallback(rec, rng),
        },
        RecordOp::Perturb => match pick(rng, &numeric) {
            Some(p) => {
                let cur = rec.values.get(&p.name).cloned().unwrap_or_else(|| zero(&p));
                let v = perturb(&cur, rng);
                rec.values.insert(p.name, v);
            }
            None => fallback(rec, rng),
        },
        RecordOp::Boundary => match params.choose(rng) {
            Some(p) => {
                let v = boundary(p, rng);
                rec.values.insert(p.name.clone(), v);
            }
            None => fallback(rec, rng),
        },
        RecordOp::Zero => match params.choose(rng) {
            Some(p) => {
                rec.values.insert(p.name.clone(), zero(p));
            }
            None => fallback(rec, rng),
        },
        RecordOp::CopyFromPartner => {
            let field = partner.and_then(|other| {
                let names: Vec<&String> = other.values.keys().collect();
                names.choose(rng).map(|n| ((*n).clone(), other.values[*n].clone()))
            });
            match field {
                Some((name, v)) => {
                    rec.values.insert(name, v);
                }
                None => fallback(rec, rng),
            }
        }
        RecordOp::Reset => fallback(rec, rng),
        RecordOp::ShapeIncrement | RecordOp::ShapeDecrement => match rec.shape.as_mut() {
            Some(shape) => {
                let dim = if rng.gen() { &mut shape.samples } else { &mut shape.features };
                let step = 1 + rng.gen_range(0..=*dim / 4);
                *dim = if op == RecordOp::ShapeIncrement {
                    dim.saturating_add(step)
                } else {
                    dim.saturating_sub(step)
                };
            }
            None => fallback(rec, rng),
        },
    }
}

/// Applies one uniformly drawn operator and clamps the result into `domain`.
///
/// `partner` feeds the field-copy operator on typed records.
pub fn mutate<R: Rng + ?Sized>(
    input: &TargetInput,
    domain: &InputDomain,
    partner: Option<&TargetInput>,
    rng: &mut R,
) -> TargetInput {
    let out = match (input, domain) {
        (TargetInput::Bytes { data }, _) => {
            let mut data = data.clone();
            apply_byte_op(BYTE_OPS[rng.gen_range(0..BYTE_OPS.len())], &mut data, rng);
            TargetInput::Bytes { data }
        }
        (TargetInput::Params(rec), InputDomain::Params { params, .. }) => {
            let mut rec = rec.clone();
            let op = RECORD_OPS[rng.gen_range(0..RECORD_OPS.len())];
            apply_record_op(op, &mut rec, params, partner.and_then(TargetInput::as_params), rng);
            TargetInput::Params(rec)
        }
        (other, _) => other.clone(),
    };
    domain.clamp(out, &mut || rng.gen())
}

/// The first `cut_a` bytes of `a` followed by the last `cut_b` bytes of `b`,
/// both clipped to the available lengths.
pub fn crossover_at(a: &[u8], b: &[u8], cut_a: usize, cut_b: usize) -> Vec<u8> {
    let mut out = a[..cut_a.min(a.len())].to_vec();
    out.extend_from_slice(&b[b.len() - cut_b.min(b.len())..]);
    out
}

/// Single-point splice for byte payloads; for records, each field (and the
/// shape) comes from `b` with probability 1/2.
pub fn crossover<R: Rng + ?Sized>(a: &TargetInput, b: &TargetInput, rng: &mut R) -> Result<TargetInput> {
    match (a, b) {
        (TargetInput::Bytes { data: x }, TargetInput::Bytes { data: y }) => {
            let ca = rng.gen_range(0..=x.len());
            let cb = rng.gen_range(0..=y.len());
            Ok(TargetInput::bytes(crossover_at(x, y, ca, cb)))
        }
        (TargetInput::Params(x), TargetInput::Params(y)) => {
            let mut out = x.clone();
            for (name, v) in &y.values {
                if rng.gen() {
                    out.values.insert(name.clone(), v.clone());
                }
            }
            if y.shape.is_some() && rng.gen() {
                out.shape = y.shape;
            }
            Ok(TargetInput::Params(out))
        }
        _ => Err(Error::Incompatible(format!(
            "cannot cross a {} payload with a {} payload",
            a.kind_name(),
            b.kind_name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Shape, ShapeBounds};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn insert_into_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut d = Vec::new();
        apply_byte_op(ByteOp::InsertByte, &mut d, &mut rng);
        assert_eq!(d.len(), 1);
        for op in BYTE_OPS {
            let mut d = Vec::new();
            apply_byte_op(op, &mut d, &mut rng);
            assert_eq!(d.len(), 1, "{op:?}");
        }
    }

    #[test]
    fn splice_examples() {
        assert_eq!(crossover_at(&[1, 2, 3, 4], &[9, 9], 2, 1), vec![1, 2, 9]);
        let x = [5, 6, 7];
        assert_eq!(crossover_at(&x, &x, 3, 0), x.to_vec());
    }

    #[test]
    fn crossover_rejects_mixed_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = TargetInput::bytes(vec![1]);
        let b = TargetInput::Params(ParamRecord::default());
        assert!(matches!(crossover(&a, &b, &mut rng), Err(Error::Incompatible(_))));
    }

    #[test]
    fn golden_mutation() {
        let domain = InputDomain::bytes(0, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let out = mutate(&TargetInput::bytes(vec![0, 0, 0, 0]), &domain, None, &mut rng);
        assert_eq!(out, TargetInput::bytes(GOLDEN.to_vec()));
    }

    const GOLDEN: [u8; 4] = [0, 1, 0, 0];

    #[test]
    fn record_ops_stay_in_domain() {
        let params = vec![
            ParamSpec::categorical("solver", &["a", "b"]),
            ParamSpec::int("iters", 1, 10),
            ParamSpec::real("tol", 0.0, 0.5),
        ];
        let domain = InputDomain::Params {
            params: params.clone(),
            shape: Some(ShapeBounds { samples: (1, 4), features: (1, 4) }),
            size_field: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = domain_seed();
        for _ in 0..2000 {
            let partner = domain_seed();
            x = mutate(&x, &domain, Some(&partner), &mut rng);
            domain.check(&x).unwrap();
        }

        fn domain_seed() -> TargetInput {
            let mut rec = ParamRecord::default();
            rec.values.insert("solver".into(), ParamValue::Cat("b".into()));
            rec.values.insert("iters".into(), ParamValue::Int(5));
            rec.values.insert("tol".into(), ParamValue::Real(0.25));
            rec.shape = Some(Shape { samples: 2, features: 2 });
            TargetInput::Params(rec)
        }
    }
}
