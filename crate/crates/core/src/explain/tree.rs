use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ColumnKind, FeatureMatrix, Value};
use crate::{Error, Result};

/// Gains closer than this are treated as ties.
pub const GAIN_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: 5, min_leaf: 2 }
    }
}

/// Test applied at a split; rows satisfying it go left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "value", rename_all = "snake_case")]
pub enum Predicate {
    Le(f64),
    Eq(String),
}

impl Predicate {
    pub fn holds(&self, v: &Value) -> bool {
        match (self, v) {
            (Predicate::Le(t), Value::Num(x)) => x <= t,
            (Predicate::Eq(c), Value::Cat(s)) => c == s,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        name: String,
        predicate: Predicate,
        /// Majority-class share of the rows reaching this node.
        purity: f64,
        support: usize,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        label: usize,
        purity: f64,
        support: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub features: Vec<String>,
    pub root: Node,
}

/// Gini impurity of a label histogram.
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|c| (*c as f64 / n).powi(2)).sum::<f64>()
}

/// Parent impurity minus the size-weighted impurity of the two children.
pub fn gini_gain(parent: &[usize], left: &[usize]) -> f64 {
    let right: Vec<usize> = parent.iter().zip(left).map(|(p, l)| p - l).collect();
    let n: usize = parent.iter().sum();
    let nl: usize = left.iter().sum();
    let n = n as f64;
    gini(parent) - (nl as f64 / n) * gini(left) - ((n - nl as f64) / n) * gini(&right)
}

fn histogram(labels: &[usize], rows: &[usize], classes: usize) -> Vec<usize> {
    let mut h = vec![0; classes];
    for r in rows {
        h[labels[*r]] += 1;
    }
    h
}

/// Majority label (smallest on ties) and its share.
fn majority(h: &[usize]) -> (usize, f64) {
    let n: usize = h.iter().sum();
    let (label, count) = h.iter().enumerate().fold((0, 0), |b, (i, c)| if *c > b.1 { (i, *c) } else { b });
    (label, if n == 0 { 0.0 } else { count as f64 / n as f64 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub predicate: Predicate,
    pub gain: f64,
}

/// Best split of `rows` by Gini gain, or `None` when no split leaves
/// `min_leaf` rows on both sides. Zero-gain splits are allowed, so XOR-like
/// layouts can still be separated one level down. Ties go to the lower
/// feature index, then the lower threshold or smaller category.
pub fn best_split(
    m: &FeatureMatrix,
    labels: &[usize],
    rows: &[usize],
    classes: usize,
    min_leaf: usize,
) -> Option<SplitChoice> {
    let parent = histogram(labels, rows, classes);
    let n = rows.len();
    let mut best: Option<SplitChoice> = None;
    let mut consider = |feature: usize, predicate: Predicate, left: &[usize], nl: usize| {
        if nl < min_leaf || n - nl < min_leaf {
            return;
        }
        let gain = gini_gain(&parent, left);
        if best.as_ref().is_none_or(|b| gain > b.gain + GAIN_TOLERANCE) {
            best = Some(SplitChoice { feature, predicate, gain });
        }
    };
    for (f, col) in m.columns.iter().enumerate() {
        match &col.kind {
            ColumnKind::Numeric => {
                let mut vals: Vec<(f64, usize)> = rows
                    .iter()
                    .map(|r| match &m.rows[*r][f] {
                        Value::Num(x) => (*x, labels[*r]),
                        Value::Cat(_) => (f64::NAN, labels[*r]),
                    })
                    .collect();
                vals.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut left = vec![0; classes];
                for i in 0..n.saturating_sub(1) {
                    left[vals[i].1] += 1;
                    let (x, y) = (vals[i].0, vals[i + 1].0);
                    if x < y {
                        consider(f, Predicate::Le((x + y) / 2.0), &left, i + 1);
                    }
                }
            }
            ColumnKind::Categorical(values) => {
                for v in values {
                    let mut left = vec![0; classes];
                    let mut nl = 0;
                    for r in rows {
                        if matches!(&m.rows[*r][f], Value::Cat(s) if s == v) {
                            left[labels[*r]] += 1;
                            nl += 1;
                        }
                    }
                    consider(f, Predicate::Eq(v.clone()), &left, nl);
                }
            }
        }
    }
    best
}

fn grow(
    m: &FeatureMatrix,
    labels: &[usize],
    rows: Vec<usize>,
    classes: usize,
    depth: usize,
    cfg: &TreeConfig,
) -> Node {
    let h = histogram(labels, &rows, classes);
    let (label, purity) = majority(&h);
    let support = rows.len();
    let leaf = Node::Leaf { label, purity, support };
    if depth >= cfg.max_depth || gini(&h) == 0.0 || support < 2 * cfg.min_leaf.max(1) {
        return leaf;
    }
    let Some(split) = best_split(m, labels, &rows, classes, cfg.min_leaf.max(1)) else {
        return leaf;
    };
    let (l, r): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|i| split.predicate.holds(&m.rows[**i][split.feature]));
    Node::Split {
        feature: split.feature,
        name: m.columns[split.feature].name.clone(),
        predicate: split.predicate,
        purity,
        support,
        left: Box::new(grow(m, labels, l, classes, depth + 1, cfg)),
        right: Box::new(grow(m, labels, r, classes, depth + 1, cfg)),
    }
}

/// Greedy binary CART over Gini impurity.
pub fn learn_tree(m: &FeatureMatrix, labels: &[usize], cfg: &TreeConfig) -> Result<DecisionTree> {
    if m.is_empty() {
        return Err(Error::Empty("feature matrix has no rows"));
    }
    if m.len() != labels.len() {
        return Err(Error::Config(format!("{} rows but {} labels", m.len(), labels.len())));
    }
    let classes = labels.iter().max().map_or(1, |x| x + 1);
    let root = grow(m, labels, (0..m.len()).collect(), classes, 0, cfg);
    Ok(DecisionTree { features: m.columns.iter().map(|c| c.name.clone()).collect(), root })
}

impl DecisionTree {
    pub fn predict(&self, row: &[Value]) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { label, .. } => return *label,
                Node::Split { feature, predicate, left, right, .. } => {
                    node = if predicate.holds(&row[*feature]) { left } else { right };
                }
            }
        }
    }

    /// Share of rows whose prediction equals their label.
    pub fn accuracy(&self, m: &FeatureMatrix, labels: &[usize]) -> f64 {
        if m.is_empty() {
            return 0.0;
        }
        let hits = m.rows.iter().zip(labels).filter(|(r, l)| self.predict(r) == **l).count();
        hits as f64 / m.len() as f64
    }

    pub fn leaves(&self) -> usize {
        fn count(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => count(left) + count(right),
            }
        }
        count(&self.root)
    }

    pub fn depth(&self) -> usize {
        fn d(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + d(left).max(d(right)),
            }
        }
        d(&self.root)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: String,
    pub predicate: Predicate,
    /// `false` when the path takes the right branch (predicate negated).
    pub holds: bool,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.predicate, self.holds) {
            (Predicate::Le(t), true) => write!(f, "{} <= {t}", self.feature),
            (Predicate::Le(t), false) => write!(f, "{} > {t}", self.feature),
            (Predicate::Eq(c), true) => write!(f, "{} = '{c}'", self.feature),
            (Predicate::Eq(c), false) => write!(f, "{} != '{c}'", self.feature),
        }
    }
}

/// A root-to-leaf conjunction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conjunction {
    pub conditions: Vec<Condition>,
    pub purity: f64,
    pub support: usize,
}

impl fmt::Display for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conditions.is_empty() {
            return f.write_str("true");
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(" and ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// For each label, the conjunctions of the leaves carrying it.
pub fn tree_predicates(tree: &DecisionTree) -> BTreeMap<usize, Vec<Conjunction>> {
    fn walk(n: &Node, path: &mut Vec<Condition>, out: &mut BTreeMap<usize, Vec<Conjunction>>) {
        match n {
            Node::Leaf { label, purity, support } => out.entry(*label).or_default().push(Conjunction {
                conditions: path.clone(),
                purity: *purity,
                support: *support,
            }),
            Node::Split { name, predicate, left, right, .. } => {
                for (holds, child) in [(true, left), (false, right)] {
                    path.push(Condition { feature: name.clone(), predicate: predicate.clone(), holds });
                    walk(child, path, out);
                    path.pop();
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(&tree.root, &mut Vec::new(), &mut out);
    out
}
