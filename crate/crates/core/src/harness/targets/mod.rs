//! Built-in targets: the ten micro-benchmarks plus two synthetic programs.
//!
//! Every target carries hand-placed probes at basic-block entries. Block line
//! counts follow the source listing each benchmark was transcribed from, so
//! executed-lines cost approximates a line tracer.

mod graph;
mod search;
mod sorting;
mod synthetic;
mod trees;

use std::sync::Arc;

use super::{Block, InputDomain, Probed, Target, TargetInput, Tracer};
use crate::{Error, Result};

pub use synthetic::ToleranceSolver;

/// The micro-benchmark suite, in table order.
pub const BENCHMARKS: [&str; 10] = [
    "quicksort",
    "quick3way",
    "insertionx",
    "mergesort",
    "binarysearch",
    "seqsearch",
    "boyermoore",
    "bstinsert",
    "isbst",
    "prim",
];

/// Synthetic targets with known performance classes.
pub const SYNTHETIC: [&str; 2] = ["parity", "tolsolver"];

/// A target over byte payloads driven by a plain function.
pub struct ByteTarget {
    pub name: &'static str,
    pub tag: u16,
    pub blocks: &'static [Block],
    pub min_len: usize,
    pub max_len: usize,
    pub run: fn(&[u8], &mut Tracer) -> Probed,
}

impl Target for ByteTarget {
    fn name(&self) -> &str {
        self.name
    }

    fn tag(&self) -> u16 {
        self.tag
    }

    fn blocks(&self) -> &'static [Block] {
        self.blocks
    }

    fn domain(&self) -> InputDomain {
        InputDomain::bytes(self.min_len, self.max_len)
    }

    fn execute(&self, input: &TargetInput, tracer: &mut Tracer) -> Probed {
        let data = input.as_bytes().expect("byte target given a parameter record");
        (self.run)(data, tracer)
    }
}

pub fn lookup(name: &str) -> Result<Arc<dyn Target>> {
    let t: Arc<dyn Target> = match name {
        "quicksort" => Arc::new(sorting::QUICKSORT),
        "quick3way" => Arc::new(sorting::QUICK3WAY),
        "insertionx" => Arc::new(sorting::INSERTIONX),
        "mergesort" => Arc::new(sorting::MERGESORT),
        "binarysearch" => Arc::new(search::BINARY_SEARCH),
        "seqsearch" => Arc::new(search::SEQ_SEARCH),
        "boyermoore" => Arc::new(search::BOYER_MOORE),
        "bstinsert" => Arc::new(trees::BST_INSERT),
        "isbst" => Arc::new(trees::IS_BST),
        "prim" => Arc::new(graph::PRIM),
        "parity" => Arc::new(synthetic::PARITY),
        "tolsolver" => Arc::new(ToleranceSolver),
        other => return Err(Error::UnknownTarget(other.to_string())),
    };
    Ok(t)
}

/// Human-readable name used in comparison tables.
pub fn display_name(name: &str) -> &str {
    match name {
        "quicksort" => "Quick Sort",
        "quick3way" => "3-Ways Q-Sort",
        "insertionx" => "InsertionX Sort",
        "mergesort" => "Merge Sort",
        "binarysearch" => "Binary Search",
        "seqsearch" => "Seq. Search",
        "boyermoore" => "Boyer Moore",
        "bstinsert" => "BST Insert",
        "isbst" => "Is BST",
        "prim" => "Prim's MST",
        "parity" => "Parity",
        "tolsolver" => "Tolerance Solver",
        other => other,
    }
}

pub fn all_names() -> impl Iterator<Item = &'static str> {
    BENCHMARKS.iter().chain(SYNTHETIC.iter()).copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_instrumented, Status, TargetSpec};

    #[test]
    fn every_target_runs_its_seeds() {
        for name in all_names() {
            let spec = TargetSpec::builtin(name).unwrap();
            for seed in spec.default_seeds() {
                let r = run_instrumented(&spec, &seed).unwrap();
                assert_eq!(r.status, Status::Ok, "{name}");
                assert!(!r.edges.is_empty(), "{name}");
                assert!(r.cost > 0.0, "{name}");
            }
        }
    }

    #[test]
    fn tags_are_unique() {
        let mut tags: Vec<u16> = all_names().map(|n| lookup(n).unwrap().tag()).collect();
        tags.sort();
        tags.dedup();
        assert_eq!(tags.len(), BENCHMARKS.len() + SYNTHETIC.len());
    }

    #[test]
    fn unknown_target() {
        assert!(matches!(lookup("bogosort"), Err(Error::UnknownTarget(_))));
    }
}
