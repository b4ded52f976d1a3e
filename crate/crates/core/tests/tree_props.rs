use std::collections::BTreeSet;

use dpfuzz_core::explain::{
    learn_tree, tree_predicates, Column, ColumnKind, FeatureMatrix, Node, Predicate, RowSource, TreeConfig, Value,
};
use proptest::prelude::*;

const CATS: [&str; 3] = ["a", "b", "c"];

/// Numeric columns of small integers plus, optionally, one categorical column.
fn matrix(rows: &[(Vec<u8>, u8)], with_cat: bool) -> FeatureMatrix {
    let width = rows[0].0.len();
    let mut columns: Vec<Column> =
        (0..width).map(|i| Column { name: format!("x{i}"), kind: ColumnKind::Numeric }).collect();
    if with_cat {
        let seen: BTreeSet<String> = rows.iter().map(|(_, c)| CATS[*c as usize % 3].to_string()).collect();
        columns.push(Column { name: "cat".into(), kind: ColumnKind::Categorical(seen.into_iter().collect()) });
    }
    let data = rows
        .iter()
        .map(|(xs, c)| {
            let mut row: Vec<Value> = xs.iter().map(|x| Value::Num(*x as f64)).collect();
            if with_cat {
                row.push(Value::Cat(CATS[*c as usize % 3].to_string()));
            }
            row
        })
        .collect();
    let sources = (0..rows.len()).map(|index| RowSource { path: None, index }).collect();
    FeatureMatrix { columns, rows: data, sources }
}

fn impurity(labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let n = labels.len() as f64;
    let classes: BTreeSet<usize> = labels.iter().copied().collect();
    1.0 - classes
        .iter()
        .map(|c| (labels.iter().filter(|l| *l == c).count() as f64 / n).powi(2))
        .sum::<f64>()
}

fn gain_of(m: &FeatureMatrix, labels: &[usize], feature: usize, p: &Predicate) -> (f64, usize) {
    let (mut l, mut r) = (Vec::new(), Vec::new());
    for (row, y) in m.rows.iter().zip(labels) {
        if p.holds(&row[feature]) { l.push(*y) } else { r.push(*y) }
    }
    let n = labels.len() as f64;
    let g = impurity(labels) - l.len() as f64 / n * impurity(&l) - r.len() as f64 / n * impurity(&r);
    (g, l.len().min(r.len()))
}

/// Exhaustive root split: every feature, every midpoint or category, in
/// feature order then threshold/category order; first maximal gain wins.
fn oracle_root(m: &FeatureMatrix, labels: &[usize], min_leaf: usize) -> Option<(usize, Predicate, f64)> {
    let mut cands = Vec::new();
    for (f, col) in m.columns.iter().enumerate() {
        match &col.kind {
            ColumnKind::Numeric => {
                let mut vs: Vec<f64> = m
                    .rows
                    .iter()
                    .map(|r| match r[f] { Value::Num(x) => x, _ => unreachable!() })
                    .collect();
                vs.sort_by(f64::total_cmp);
                vs.dedup();
                for w in vs.windows(2) {
                    cands.push((f, Predicate::Le((w[0] + w[1]) / 2.0)));
                }
            }
            ColumnKind::Categorical(values) => {
                for v in values {
                    cands.push((f, Predicate::Eq(v.clone())));
                }
            }
        }
    }
    let scored: Vec<_> = cands
        .into_iter()
        .map(|(f, p)| {
            let (g, small) = gain_of(m, labels, f, &p);
            (f, p, g, small)
        })
        .filter(|c| c.3 >= min_leaf)
        .collect();
    let best = scored.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    scored.into_iter().find(|c| c.2 >= best - 1e-12).map(|(f, p, g, _)| (f, p, g))
}

fn arb_rows() -> impl Strategy<Value = (Vec<(Vec<u8>, u8)>, Vec<usize>, bool)> {
    (1usize..=4, 1usize..=50, any::<bool>()).prop_flat_map(|(w, n, cat)| {
        let w = if cat { w.min(3) } else { w };
        (
            prop::collection::vec((prop::collection::vec(0u8..6, w), 0u8..3), n),
            prop::collection::vec(0usize..3, n),
            Just(cat),
        )
    })
}

proptest! {
    #[test]
    fn root_split_matches_exhaustive_enumeration((rows, labels, cat) in arb_rows()) {
        let m = matrix(&rows, cat);
        let cfg = TreeConfig::default();
        let tree = learn_tree(&m, &labels, &cfg).unwrap();
        let pure = impurity(&labels) == 0.0;
        let oracle = if pure || labels.len() < 2 * cfg.min_leaf { None } else { oracle_root(&m, &labels, cfg.min_leaf) };
        match (&tree.root, oracle) {
            (Node::Leaf { .. }, None) => {}
            (Node::Split { feature, predicate, .. }, Some((f, p, g))) => {
                prop_assert_eq!(*feature, f);
                prop_assert_eq!(predicate, &p);
                let (got, _) = gain_of(&m, &labels, *feature, predicate);
                prop_assert!((got - g).abs() < 1e-12);
            }
            (root, oracle) => prop_assert!(false, "tree root {:?} vs oracle {:?}", root, oracle),
        }
    }

    #[test]
    fn every_row_reaches_exactly_one_leaf((rows, labels, cat) in arb_rows()) {
        let m = matrix(&rows, cat);
        let tree = learn_tree(&m, &labels, &TreeConfig { max_depth: 4, min_leaf: 1 }).unwrap();
        let leaves: Vec<_> = tree_predicates(&tree).into_values().flatten().collect();
        prop_assert_eq!(leaves.len(), tree.leaves());
        for row in &m.rows {
            let hits = leaves
                .iter()
                .filter(|conj| conj.conditions.iter().all(|c| {
                    let f = m.column_index(&c.feature).unwrap();
                    c.predicate.holds(&row[f]) == c.holds
                }))
                .count();
            prop_assert_eq!(hits, 1);
        }
        let support: usize = leaves.iter().map(|c| c.support).sum();
        prop_assert_eq!(support, m.len());
    }

    #[test]
    fn accuracy_beats_majority_and_splits_never_raise_impurity((rows, labels, cat) in arb_rows()) {
        let m = matrix(&rows, cat);
        let tree = learn_tree(&m, &labels, &TreeConfig::default()).unwrap();
        let majority = (0..3).map(|c| labels.iter().filter(|l| **l == c).count()).max().unwrap();
        prop_assert!(tree.accuracy(&m, &labels) + 1e-12 >= majority as f64 / labels.len() as f64);

        fn check(n: &Node, rows: Vec<usize>, m: &FeatureMatrix, labels: &[usize]) -> bool {
            match n {
                Node::Leaf { support, .. } => *support == rows.len(),
                Node::Split { feature, predicate, left, right, .. } => {
                    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|i| predicate.holds(&m.rows[**i][*feature]));
                    let lab = |ix: &[usize]| ix.iter().map(|i| labels[*i]).collect::<Vec<_>>();
                    let n = rows.len() as f64;
                    let after = l.len() as f64 / n * impurity(&lab(&l)) + r.len() as f64 / n * impurity(&lab(&r));
                    after <= impurity(&lab(&rows)) + 1e-12
                        && !l.is_empty() && !r.is_empty()
                        && check(left, l, m, labels)
                        && check(right, r, m, labels)
                }
            }
        }
        prop_assert!(check(&tree.root, (0..m.len()).collect(), &m, &labels));
    }

    #[test]
    fn separable_data_is_learned_exactly(
        xs in prop::collection::vec(0u8..200, 4..50),
        cut in 1u8..199,
    ) {
        let rows: Vec<(Vec<u8>, u8)> = xs.iter().map(|x| (vec![*x, x.wrapping_mul(7)], 0)).collect();
        let labels: Vec<usize> = xs.iter().map(|x| usize::from(*x > cut)).collect();
        let m = matrix(&rows, false);
        let tree = learn_tree(&m, &labels, &TreeConfig { max_depth: 5, min_leaf: 1 }).unwrap();
        prop_assert_eq!(tree.accuracy(&m, &labels), 1.0);
    }
}
