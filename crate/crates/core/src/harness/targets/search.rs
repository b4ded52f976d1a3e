use super::{Block, ByteTarget, Probed, Tracer};

// ------------------------------------------------------------- binary search

const BS_INIT: u8 = 0;
const BS_QUERY: u8 = 1;
const BS_RANK_INIT: u8 = 2;
const BS_RANK_TEST: u8 = 3;
const BS_RANK_MID: u8 = 4;
const BS_GO_LEFT: u8 = 5;
const BS_GO_RIGHT_TEST: u8 = 6;
const BS_GO_RIGHT: u8 = 7;
const BS_FOUND: u8 = 8;
const BS_MISS: u8 = 9;
const BS_DONE: u8 = 10;

static BINARY_SEARCH_BLOCKS: &[Block] = &[
    Block::new("binarysearch.init", 3),
    Block::new("binarysearch.query", 1),
    Block::new("binarysearch.rank.init", 2),
    Block::new("binarysearch.rank.test", 1),
    Block::new("binarysearch.rank.mid", 2),
    Block::new("binarysearch.rank.go_left", 1),
    Block::new("binarysearch.rank.go_right_test", 1),
    Block::new("binarysearch.rank.go_right", 1),
    Block::new("binarysearch.rank.found", 1),
    Block::new("binarysearch.rank.miss", 1),
    Block::new("binarysearch.done", 1),
];

fn rank(key: u8, table: &[u8], t: &mut Tracer) -> Probed<Option<usize>> {
    t.hit(BS_RANK_INIT)?;
    let (mut lo, mut hi) = (0isize, table.len() as isize - 1);
    loop {
        t.hit(BS_RANK_TEST)?;
        if lo > hi {
            break;
        }
        t.hit(BS_RANK_MID)?;
        let mid = lo + (hi - lo) / 2;
        if key < table[mid as usize] {
            t.hit(BS_GO_LEFT)?;
            hi = mid - 1;
            continue;
        }
        t.hit(BS_GO_RIGHT_TEST)?;
        if key > table[mid as usize] {
            t.hit(BS_GO_RIGHT)?;
            lo = mid + 1;
        } else {
            t.hit(BS_FOUND)?;
            return Ok(Some(mid as usize));
        }
    }
    t.hit(BS_MISS)?;
    Ok(None)
}

/// The first half of the payload (sorted, deduplicated) is the table; every
/// byte of the second half is looked up in it.
fn binary_search(data: &[u8], t: &mut Tracer) -> Probed {
    t.hit(BS_INIT)?;
    let (keys, queries) = data.split_at(data.len() / 2);
    let mut table = keys.to_vec();
    table.sort_unstable();
    table.dedup();
    for &q in queries {
        t.hit(BS_QUERY)?;
        rank(q, &table, t)?;
    }
    t.hit(BS_DONE)
}

pub const BINARY_SEARCH: ByteTarget = ByteTarget {
    name: "binarysearch",
    tag: 5,
    blocks: BINARY_SEARCH_BLOCKS,
    min_len: 0,
    max_len: 64,
    run: binary_search,
};

// --------------------------------------------------------- sequential search

const SS_INIT: u8 = 0;
const SS_TEST: u8 = 1;
const SS_COMPARE: u8 = 2;
const SS_FOUND: u8 = 3;
const SS_MISS: u8 = 4;
const SS_EMPTY: u8 = 5;

static SEQ_SEARCH_BLOCKS: &[Block] = &[
    Block::new("seqsearch.init", 2),
    Block::new("seqsearch.test", 1),
    Block::new("seqsearch.compare", 1),
    Block::new("seqsearch.found", 1),
    Block::new("seqsearch.miss", 1),
    Block::new("seqsearch.empty", 1),
];

/// Searches for the first byte in the rest of the payload.
fn seq_search(data: &[u8], t: &mut Tracer) -> Probed {
    t.hit(SS_INIT)?;
    let Some((&key, rest)) = data.split_first() else {
        return t.hit(SS_EMPTY);
    };
    for &x in rest {
        t.hit(SS_TEST)?;
        t.hit(SS_COMPARE)?;
        if x == key {
            return t.hit(SS_FOUND);
        }
    }
    t.hit(SS_TEST)?;
    t.hit(SS_MISS)
}

pub const SEQ_SEARCH: ByteTarget = ByteTarget {
    name: "seqsearch",
    tag: 6,
    blocks: SEQ_SEARCH_BLOCKS,
    min_len: 0,
    max_len: 64,
    run: seq_search,
};

// --------------------------------------------------------------- Boyer-Moore

const BM_ALPHABET: u8 = 0;
const BM_PATTERN: u8 = 1;
const BM_OUTER_TEST: u8 = 2;
const BM_RESET: u8 = 3;
const BM_INNER_TEST: u8 = 4;
const BM_COMPARE: u8 = 5;
const BM_MISMATCH: u8 = 6;
const BM_MATCH_CHECK: u8 = 7;
const BM_FOUND: u8 = 8;
const BM_NOT_FOUND: u8 = 9;
const BM_SETUP: u8 = 10;

static BOYER_MOORE_BLOCKS: &[Block] = &[
    Block::new("boyermoore.right.alphabet", 1),
    Block::new("boyermoore.right.pattern", 1),
    Block::new("boyermoore.search.outer_test", 1),
    Block::new("boyermoore.search.reset", 1),
    Block::new("boyermoore.search.inner_test", 1),
    Block::new("boyermoore.search.compare", 1),
    Block::new("boyermoore.search.mismatch", 2),
    Block::new("boyermoore.search.match_check", 1),
    Block::new("boyermoore.search.found", 1),
    Block::new("boyermoore.search.not_found", 1),
    Block::new("boyermoore.setup", 3),
];

/// Bad-character Boyer-Moore. The first byte selects a pattern length of
/// 1..=4; the pattern follows, then the text.
fn boyer_moore(data: &[u8], t: &mut Tracer) -> Probed {
    t.hit(BM_SETUP)?;
    let (m, rest) = match data.split_first() {
        Some((&b, rest)) => ((1 + (b % 4) as usize).min(rest.len()), rest),
        None => (0, data),
    };
    let (pat, txt) = rest.split_at(m);
    let mut right = [-1isize; 256];
    for r in right.iter_mut() {
        t.hit(BM_ALPHABET)?;
        *r = -1;
    }
    for (j, &c) in pat.iter().enumerate() {
        t.hit(BM_PATTERN)?;
        right[c as usize] = j as isize;
    }
    let n = txt.len();
    let mut i = 0usize;
    loop {
        t.hit(BM_OUTER_TEST)?;
        if i + m > n {
            break;
        }
        t.hit(BM_RESET)?;
        let mut skip = 0isize;
        let mut j = m as isize - 1;
        loop {
            t.hit(BM_INNER_TEST)?;
            if j < 0 {
                break;
            }
            t.hit(BM_COMPARE)?;
            let c = txt[i + j as usize];
            if pat[j as usize] != c {
                t.hit(BM_MISMATCH)?;
                skip = (j - right[c as usize]).max(1);
                break;
            }
            j -= 1;
        }
        t.hit(BM_MATCH_CHECK)?;
        if skip == 0 {
            return t.hit(BM_FOUND);
        }
        i += skip as usize;
    }
    t.hit(BM_NOT_FOUND)
}

pub const BOYER_MOORE: ByteTarget = ByteTarget {
    name: "boyermoore",
    tag: 7,
    blocks: BOYER_MOORE_BLOCKS,
    min_len: 0,
    max_len: 64,
    run: boyer_moore,
};
