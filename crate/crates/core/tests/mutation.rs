use dpfuzz_core::fuzz::{apply_byte_op, crossover, crossover_at, mutate, ByteOp, BYTE_OPS};
use dpfuzz_core::harness::{targets, InputDomain, TargetInput, TargetSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn splice_examples() {
    assert_eq!(crossover_at(&[1, 2, 3, 4], &[9, 9], 2, 1), vec![1, 2, 9]);
    let x = [5u8, 6, 7];
    assert_eq!(crossover_at(&x, &x, x.len(), 0), x.to_vec());
}

#[test]
fn empty_payload_grows_by_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for op in BYTE_OPS {
        let mut d = Vec::new();
        apply_byte_op(op, &mut d, &mut rng);
        assert_eq!(d.len(), 1, "{op:?}");
    }
    let mut d = Vec::new();
    apply_byte_op(ByteOp::InsertByte, &mut d, &mut rng);
    assert_eq!(d.len(), 1);
}

#[test]
fn golden_mutation_is_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let out = mutate(&TargetInput::bytes(vec![0, 0, 0, 0]), &InputDomain::bytes(0, 32), None, &mut rng);
    assert_eq!(out, TargetInput::bytes(vec![0, 1, 0, 0]));
}

proptest! {
    #[test]
    fn mutants_stay_in_domain(name in prop::sample::select(targets::all_names().collect::<Vec<_>>()), seed in any::<u64>()) {
        let spec = TargetSpec::builtin(name).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seeds = spec.default_seeds();
        let mut x = seeds[0].clone();
        for i in 0..200 {
            let partner = &seeds[i % seeds.len()];
            x = mutate(&x, &spec.domain, Some(partner), &mut rng);
            prop_assert!(spec.domain.check(&x).is_ok(), "{:?}", x);
        }
    }

    #[test]
    fn splices_are_bounded(a in prop::collection::vec(any::<u8>(), 0..40), b in prop::collection::vec(any::<u8>(), 0..40), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = crossover(&TargetInput::bytes(a.clone()), &TargetInput::bytes(b.clone()), &mut rng).unwrap();
        let out = out.as_bytes().unwrap();
        prop_assert!(out.len() <= a.len() + b.len());
        // some prefix of a followed by some suffix of b
        prop_assert!((0..=a.len().min(out.len())).any(|c| out[..c] == a[..c] && b.ends_with(&out[c..])));
    }
}

#[test]
fn mixed_kinds_do_not_cross() {
    let spec = TargetSpec::builtin("tolsolver").unwrap();
    let rec = spec.default_seeds().remove(0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(crossover(&rec, &TargetInput::bytes(vec![1]), &mut rng).is_err());
}
