use super::{Block, ByteTarget, Probed, Tracer};

const VERTICES: usize = 8;

const PM_INIT: u8 = 0;
const PM_BUILD: u8 = 1;
const PM_VERTEX: u8 = 2;
const PM_SKIP: u8 = 3;
const PM_TREE: u8 = 4;
const PM_TEST: u8 = 5;
const PM_POP: u8 = 6;
const PM_STALE: u8 = 7;
const PM_ACCEPT: u8 = 8;
const PM_VISIT_V: u8 = 9;
const PM_VISIT_W: u8 = 10;
const PM_SCAN: u8 = 11;
const PM_SCAN_EDGE: u8 = 12;
const PM_SCAN_PUSH: u8 = 13;
const PQ_INSERT: u8 = 14;
const PQ_SWIM_TEST: u8 = 15;
const PQ_SWIM_EXCH: u8 = 16;
const PQ_DELMIN: u8 = 17;
const PQ_SINK_TEST: u8 = 18;
const PQ_SINK_PICK: u8 = 19;
const PQ_SINK_STOP: u8 = 20;
const PQ_SINK_EXCH: u8 = 21;

static PRIM_BLOCKS: &[Block] = &[
    Block::new("prim.init", 3),
    Block::new("prim.graph.add_edge", 3),
    Block::new("prim.main.vertex", 1),
    Block::new("prim.main.skip", 1),
    Block::new("prim.tree.init", 1),
    Block::new("prim.tree.test", 1),
    Block::new("prim.tree.pop", 2),
    Block::new("prim.tree.stale", 1),
    Block::new("prim.tree.accept", 2),
    Block::new("prim.tree.visit_v", 1),
    Block::new("prim.tree.visit_w", 1),
    Block::new("prim.scan.entry", 1),
    Block::new("prim.scan.edge", 1),
    Block::new("prim.scan.push", 1),
    Block::new("prim.pq.insert", 2),
    Block::new("prim.pq.swim_test", 1),
    Block::new("prim.pq.swim_exch", 2),
    Block::new("prim.pq.delmin", 4),
    Block::new("prim.pq.sink_test", 1),
    Block::new("prim.pq.sink_pick", 1),
    Block::new("prim.pq.sink_stop", 1),
    Block::new("prim.pq.sink_exch", 2),
];

#[derive(Clone, Copy)]
struct Edge {
    v: usize,
    w: usize,
    weight: u8,
}

impl Edge {
    fn other(&self, x: usize) -> usize {
        if x == self.v {
            self.w
        } else {
            self.v
        }
    }
}

/// Binary min-heap of edge indices ordered by (weight, index).
struct MinPq<'a> {
    heap: Vec<usize>,
    edges: &'a [Edge],
}

impl MinPq<'_> {
    fn greater(&self, i: usize, j: usize) -> bool {
        let (a, b) = (self.heap[i], self.heap[j]);
        (self.edges[a].weight, a) > (self.edges[b].weight, b)
    }

    fn insert(&mut self, e: usize, t: &mut Tracer) -> Probed {
        t.hit(PQ_INSERT)?;
        self.heap.push(e);
        let mut k = self.heap.len() - 1;
        loop {
            t.hit(PQ_SWIM_TEST)?;
            if k == 0 || !self.greater((k - 1) / 2, k) {
                return Ok(());
            }
            t.hit(PQ_SWIM_EXCH)?;
            self.heap.swap((k - 1) / 2, k);
            k = (k - 1) / 2;
        }
    }

    fn del_min(&mut self, t: &mut Tracer) -> Probed<usize> {
        t.hit(PQ_DELMIN)?;
        let last = self.heap.len() - 1;
        self.heap.swap(0, last);
        let min = self.heap.pop().expect("non-empty heap");
        let n = self.heap.len();
        let mut k = 0;
        loop {
            t.hit(PQ_SINK_TEST)?;
            let mut j = 2 * k + 1;
            if j >= n {
                return Ok(min);
            }
            if j + 1 < n && self.greater(j, j + 1) {
                t.hit(PQ_SINK_PICK)?;
                j += 1;
            }
            if !self.greater(k, j) {
                t.hit(PQ_SINK_STOP)?;
                return Ok(min);
            }
            t.hit(PQ_SINK_EXCH)?;
            self.heap.swap(k, j);
            k = j;
        }
    }
}

fn scan(
    v: usize,
    adj: &[Vec<usize>],
    edges: &[Edge],
    marked: &mut [bool],
    pq: &mut MinPq<'_>,
    t: &mut Tracer,
) -> Probed {
    t.hit(PM_SCAN)?;
    marked[v] = true;
    for &e in &adj[v] {
        t.hit(PM_SCAN_EDGE)?;
        if !marked[edges[e].other(v)] {
            t.hit(PM_SCAN_PUSH)?;
            pq.insert(e, t)?;
        }
    }
    Ok(())
}

/// Lazy Prim minimum spanning forest over an 8-vertex multigraph whose edges
/// are read from byte triples (u, v, weight).
fn prim(data: &[u8], t: &mut Tracer) -> Probed {
    t.hit(PM_INIT)?;
    let mut edges = Vec::with_capacity(data.len() / 3);
    let mut adj = vec![Vec::new(); VERTICES];
    for c in data.chunks_exact(3) {
        t.hit(PM_BUILD)?;
        let e = Edge { v: c[0] as usize % VERTICES, w: c[1] as usize % VERTICES, weight: c[2] };
        adj[e.v].push(edges.len());
        if e.w != e.v {
            adj[e.w].push(edges.len());
        }
        edges.push(e);
    }
    let mut marked = [false; VERTICES];
    let mut pq = MinPq { heap: Vec::new(), edges: &edges };
    let mut mst = Vec::new();
    for s in 0..VERTICES {
        t.hit(PM_VERTEX)?;
        if marked[s] {
            t.hit(PM_SKIP)?;
            continue;
        }
        t.hit(PM_TREE)?;
        scan(s, &adj, &edges, &mut marked, &mut pq, t)?;
        loop {
            t.hit(PM_TEST)?;
            if pq.heap.is_empty() {
                break;
            }
            t.hit(PM_POP)?;
            let e = pq.del_min(t)?;
            let (v, w) = (edges[e].v, edges[e].w);
            if marked[v] && marked[w] {
                t.hit(PM_STALE)?;
                continue;
            }
            t.hit(PM_ACCEPT)?;
            mst.push(e);
            if !marked[v] {
                t.hit(PM_VISIT_V)?;
                scan(v, &adj, &edges, &mut marked, &mut pq, t)?;
            }
            if !marked[w] {
                t.hit(PM_VISIT_W)?;
                scan(w, &adj, &edges, &mut marked, &mut pq, t)?;
            }
        }
    }
    debug_assert!(mst.len() < VERTICES);
    Ok(())
}

pub const PRIM: ByteTarget = ByteTarget {
    name: "prim",
    tag: 10,
    blocks: PRIM_BLOCKS,
    min_len: 0,
    max_len: 48,
    run: prim,
};
