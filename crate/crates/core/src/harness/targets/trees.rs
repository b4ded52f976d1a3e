use super::{Block, ByteTarget, Probed, Tracer};

// ---------------------------------------------------------------- BST insert

const BI_MAIN: u8 = 0;
const BI_PUT: u8 = 1;
const BI_NEW: u8 = 2;
const BI_COMPARE: u8 = 3;
const BI_LEFT: u8 = 4;
const BI_RIGHT: u8 = 5;
const BI_UPDATE: u8 = 6;
const BI_RESIZE: u8 = 7;
const BI_INIT: u8 = 8;

static BST_INSERT_BLOCKS: &[Block] = &[
    Block::new("bstinsert.main.loop", 1),
    Block::new("bstinsert.put.entry", 1),
    Block::new("bstinsert.put.new", 1),
    Block::new("bstinsert.put.compare", 1),
    Block::new("bstinsert.put.left", 1),
    Block::new("bstinsert.put.right", 1),
    Block::new("bstinsert.put.update", 1),
    Block::new("bstinsert.put.resize", 2),
    Block::new("bstinsert.init", 1),
];

struct Node {
    key: u8,
    val: usize,
    size: usize,
    left: Option<usize>,
    right: Option<usize>,
}

fn size(nodes: &[Node], x: Option<usize>) -> usize {
    x.map_or(0, |i| nodes[i].size)
}

fn put(nodes: &mut Vec<Node>, x: Option<usize>, key: u8, val: usize, t: &mut Tracer) -> Probed<usize> {
    t.hit(BI_PUT)?;
    let Some(i) = x else {
        t.hit(BI_NEW)?;
        nodes.push(Node { key, val, size: 1, left: None, right: None });
        return Ok(nodes.len() - 1);
    };
    t.hit(BI_COMPARE)?;
    if key < nodes[i].key {
        t.hit(BI_LEFT)?;
        let l = put(nodes, nodes[i].left, key, val, t)?;
        nodes[i].left = Some(l);
    } else if key > nodes[i].key {
        t.hit(BI_RIGHT)?;
        let r = put(nodes, nodes[i].right, key, val, t)?;
        nodes[i].right = Some(r);
    } else {
        t.hit(BI_UPDATE)?;
        nodes[i].val = val;
    }
    t.hit(BI_RESIZE)?;
    nodes[i].size = 1 + size(nodes, nodes[i].left) + size(nodes, nodes[i].right);
    Ok(i)
}

/// Inserts every byte into an unbalanced binary search tree.
fn bst_insert(data: &[u8], t: &mut Tracer) -> Probed {
    t.hit(BI_INIT)?;
    let mut nodes = Vec::with_capacity(data.len());
    let mut root = None;
    for (val, &key) in data.iter().enumerate() {
        t.hit(BI_MAIN)?;
        root = Some(put(&mut nodes, root, key, val, t)?);
    }
    debug_assert_eq!(size(&nodes, root), {
        let mut k = data.to_vec();
        k.sort_unstable();
        k.dedup();
        k.len()
    });
    Ok(())
}

pub const BST_INSERT: ByteTarget = ByteTarget {
    name: "bstinsert",
    tag: 8,
    blocks: BST_INSERT_BLOCKS,
    min_len: 0,
    max_len: 32,
    run: bst_insert,
};

// -------------------------------------------------------------------- is-BST

const IB_CHECK: u8 = 0;
const IB_NULL: u8 = 1;
const IB_MIN_TEST: u8 = 2;
const IB_MIN_FAIL: u8 = 3;
const IB_MAX_TEST: u8 = 4;
const IB_MAX_FAIL: u8 = 5;
const IB_RECURSE: u8 = 6;
const IB_ORDER_INIT: u8 = 7;
const IB_ORDER_VISIT: u8 = 8;
const IB_ORDER_FAIL: u8 = 9;
const IB_ORDER_OK: u8 = 10;
const IB_REJECT: u8 = 11;
const IB_SIZE_VISIT: u8 = 12;
const IB_SIZE_FAIL: u8 = 13;

static IS_BST_BLOCKS: &[Block] = &[
    Block::new("isbst.check", 1),
    Block::new("isbst.range.null", 1),
    Block::new("isbst.range.min_test", 1),
    Block::new("isbst.range.min_fail", 1),
    Block::new("isbst.range.max_test", 1),
    Block::new("isbst.range.max_fail", 1),
    Block::new("isbst.range.recurse", 1),
    Block::new("isbst.order.init", 2),
    Block::new("isbst.order.visit", 3),
    Block::new("isbst.order.fail", 1),
    Block::new("isbst.order.ok", 1),
    Block::new("isbst.reject", 1),
    Block::new("isbst.size.visit", 2),
    Block::new("isbst.size.fail", 1),
];

/// Tree in heap layout: node `i` has children `2i+1` and `2i+2`.
fn in_range(keys: &[u8], x: usize, min: Option<u8>, max: Option<u8>, t: &mut Tracer) -> Probed<bool> {
    if x >= keys.len() {
        t.hit(IB_NULL)?;
        return Ok(true);
    }
    t.hit(IB_MIN_TEST)?;
    if min.is_some_and(|m| keys[x] <= m) {
        t.hit(IB_MIN_FAIL)?;
        return Ok(false);
    }
    t.hit(IB_MAX_TEST)?;
    if max.is_some_and(|m| keys[x] >= m) {
        t.hit(IB_MAX_FAIL)?;
        return Ok(false);
    }
    t.hit(IB_RECURSE)?;
    Ok(in_range(keys, 2 * x + 1, min, Some(keys[x]), t)? && in_range(keys, 2 * x + 2, Some(keys[x]), max, t)?)
}

fn in_order(keys: &[u8], x: usize, out: &mut Vec<u8>, t: &mut Tracer) -> Probed {
    if x >= keys.len() {
        return Ok(());
    }
    in_order(keys, 2 * x + 1, out, t)?;
    t.hit(IB_ORDER_VISIT)?;
    out.push(keys[x]);
    in_order(keys, 2 * x + 2, out, t)
}

fn subtree_size(keys: &[u8], x: usize, t: &mut Tracer) -> Probed<usize> {
    if x >= keys.len() {
        return Ok(0);
    }
    t.hit(IB_SIZE_VISIT)?;
    Ok(1 + subtree_size(keys, 2 * x + 1, t)? + subtree_size(keys, 2 * x + 2, t)?)
}

/// Range check, then an in-order scan, then a size-consistency pass that
/// recounts every subtree.
fn is_bst(data: &[u8], t: &mut Tracer) -> Probed {
    t.hit(IB_CHECK)?;
    if !in_range(data, 0, None, None, t)? {
        return t.hit(IB_REJECT);
    }
    t.hit(IB_ORDER_INIT)?;
    let mut seen = Vec::with_capacity(data.len());
    in_order(data, 0, &mut seen, t)?;
    if seen.windows(2).any(|w| w[0] >= w[1]) {
        t.hit(IB_ORDER_FAIL)?;
        return t.hit(IB_REJECT);
    }
    t.hit(IB_ORDER_OK)?;
    for x in 0..data.len() {
        let s = subtree_size(data, x, t)?;
        if s == 0 {
            return t.hit(IB_SIZE_FAIL);
        }
    }
    Ok(())
}

pub const IS_BST: ByteTarget = ByteTarget {
    name: "isbst",
    tag: 9,
    blocks: IS_BST_BLOCKS,
    min_len: 0,
    max_len: 31,
    run: is_bst,
};
