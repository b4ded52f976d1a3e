//! Hand-placed probes for native targets.
//!
//! A target declares a static table of basic blocks and calls
//! [`Tracer::hit`] on entry to each block. The tracer records the edge from
//! the previously hit block, bumps the block's execution count, and adds the
//! block's source-line count to the executed-lines cost.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

/// Maximum number of blocks per target; id 63 is the virtual entry.
pub const MAX_BLOCKS: usize = 63;
const ENTRY: usize = 63;
const DEADLINE_CHECK_MASK: u64 = 0x3ff;

/// A basic block of a native target.
#[derive(Clone, Copy, Debug)]
pub struct Block {
    pub name: &'static str,
    pub lines: u32,
}

impl Block {
    pub const fn new(name: &'static str, lines: u32) -> Self {
        Block { name, lines }
    }
}

/// Why an execution stopped early.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interrupt {
    Timeout,
}

pub type Probed<T = ()> = Result<T, Interrupt>;

/// Edge id for the transition `src → dst` inside the target tagged `tag`.
pub const fn edge_id(tag: u16, src: u8, dst: u8) -> u64 {
    ((tag as u64) << 32) | ((src as u64) << 8) | dst as u64
}

pub struct Tracer {
    tag: u16,
    blocks: &'static [Block],
    prev: usize,
    successors: [u64; 64],
    counts: [u64; 64],
    lines: u64,
    hits: u64,
    deadline: Option<Instant>,
}

impl Tracer {
    pub fn new(tag: u16, blocks: &'static [Block], deadline: Option<Instant>) -> Self {
        assert!(blocks.len() <= MAX_BLOCKS, "too many blocks");
        Tracer {
            tag,
            blocks,
            prev: ENTRY,
            successors: [0; 64],
            counts: [0; 64],
            lines: 0,
            hits: 0,
            deadline,
        }
    }

    #[inline]
    pub fn hit(&mut self, block: u8) -> Probed {
        let b = block as usize;
        self.successors[self.prev] |= 1u64 << b;
        self.counts[b] += 1;
        self.lines += self.blocks[b].lines as u64;
        self.prev = b;
        self.hits += 1;
        if self.hits & DEADLINE_CHECK_MASK == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    return Err(Interrupt::Timeout);
                }
            }
        }
        Ok(())
    }

    /// Executed source lines so far.
    pub fn lines(&self) -> u64 {
        self.lines
    }

    pub fn edges(&self) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        for (src, mask) in self.successors.iter().enumerate() {
            let mut m = *mask;
            while m != 0 {
                let dst = m.trailing_zeros();
                out.insert(edge_id(self.tag, src as u8, dst as u8));
                m &= m - 1;
            }
        }
        out
    }

    /// Per-block execution counts, omitting blocks that never ran.
    pub fn counts(&self) -> BTreeMap<String, u64> {
        self.blocks
            .iter()
            .zip(self.counts.iter())
            .filter(|(_, c)| **c > 0)
            .map(|(b, c)| (b.name.to_string(), *c))
            .collect()
    }
}
