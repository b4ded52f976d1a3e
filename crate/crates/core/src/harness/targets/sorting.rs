use super::{Block, ByteTarget, Probed, Tracer};

pub const SORT_MAX_LEN: usize = 32;

// ---------------------------------------------------------------- insertionX

const IX_INIT: u8 = 0;
const IX_SCAN_TEST: u8 = 1;
const IX_SCAN_COMPARE: u8 = 2;
const IX_SCAN_SWAP: u8 = 3;
const IX_SCAN_STEP: u8 = 4;
const IX_SORTED_CHECK: u8 = 5;
const IX_EARLY_RETURN: u8 = 6;
const IX_INSERT_INIT: u8 = 7;
const IX_INSERT_TEST: u8 = 8;
const IX_INSERT_LOAD: u8 = 9;
const IX_SHIFT_TEST: u8 = 10;
const IX_SHIFT_MOVE: u8 = 11;
const IX_INSERT_STORE: u8 = 12;
const IX_RETURN: u8 = 13;

static INSERTIONX_BLOCKS: &[Block] = &[
    Block::new("insertionx.init", 1),
    Block::new("insertionx.scan.test", 1),
    Block::new("insertionx.scan.compare", 1),
    Block::new("insertionx.scan.swap", 2),
    Block::new("insertionx.scan.step", 1),
    Block::new("insertionx.sorted_check", 1),
    Block::new("insertionx.early_return", 1),
    Block::new("insertionx.insert.init", 1),
    Block::new("insertionx.insert.test", 1),
    Block::new("insertionx.insert.load", 1),
    Block::new("insertionx.shift.test", 1),
    Block::new("insertionx.shift.move", 2),
    Block::new("insertionx.insert.store", 1),
    Block::new("insertionx.return", 1),
];

/// Insertion sort with a bubbling pre-pass that moves the minimum to the
/// front (so the inner loop needs no bound check) and exits early when the
/// pass made no exchange.
fn insertion_x(data: &[u8], t: &mut Tracer) -> Probed {
    let mut a = data.to_vec();
    let n = a.len();
    t.hit(IX_INIT)?;
    let mut exchange = 0usize;
    let mut i = n as isize - 1;
    loop {
        t.hit(IX_SCAN_TEST)?;
        if i <= 0 {
            break;
        }
        t.hit(IX_SCAN_COMPARE)?;
        let k = i as usize;
        if a[k] < a[k - 1] {
            t.hit(IX_SCAN_SWAP)?;
            a.swap(k, k - 1);
            exchange += 1;
        }
        t.hit(IX_SCAN_STEP)?;
        i -= 1;
    }
    t.hit(IX_SORTED_CHECK)?;
    if exchange == 0 {
        t.hit(IX_EARLY_RETURN)?;
        return Ok(());
    }
    t.hit(IX_INSERT_INIT)?;
    let mut i = 2;
    loop {
        t.hit(IX_INSERT_TEST)?;
        if i >= n {
            break;
        }
        t.hit(IX_INSERT_LOAD)?;
        let v = a[i];
        let mut j = i;
        loop {
            t.hit(IX_SHIFT_TEST)?;
            // a[0] holds the minimum after the pre-pass, so j never reaches 0
            if !(j > 0 && v < a[j - 1]) {
                break;
            }
            t.hit(IX_SHIFT_MOVE)?;
            a[j] = a[j - 1];
            j -= 1;
        }
        t.hit(IX_INSERT_STORE)?;
        a[j] = v;
        i += 1;
    }
    t.hit(IX_RETURN)?;
    debug_assert!(a.windows(2).all(|w| w[0] <= w[1]));
    Ok(())
}

pub const INSERTIONX: ByteTarget = ByteTarget {
    name: "insertionx",
    tag: 3,
    blocks: INSERTIONX_BLOCKS,
    min_len: 0,
    max_len: SORT_MAX_LEN,
    run: insertion_x,
};

// ----------------------------------------------------------------- quicksort

const QS_ENTRY: u8 = 0;
const QS_BASE: u8 = 1;
const QS_SPLIT: u8 = 2;
const QS_LEFT: u8 = 3;
const QS_RIGHT: u8 = 4;
const QS_P_INIT: u8 = 5;
const QS_P_LOOP: u8 = 6;
const QS_L_TEST: u8 = 7;
const QS_L_BOUND: u8 = 8;
const QS_R_TEST: u8 = 9;
const QS_R_BOUND: u8 = 10;
const QS_CROSS: u8 = 11;
const QS_EXCH: u8 = 12;
const QS_FINISH: u8 = 13;

static QUICKSORT_BLOCKS: &[Block] = &[
    Block::new("quicksort.sort.entry", 1),
    Block::new("quicksort.sort.base", 1),
    Block::new("quicksort.sort.split", 1),
    Block::new("quicksort.sort.left", 1),
    Block::new("quicksort.sort.right", 1),
    Block::new("quicksort.partition.init", 3),
    Block::new("quicksort.partition.loop", 1),
    Block::new("quicksort.scan_left.test", 1),
    Block::new("quicksort.scan_left.bound", 1),
    Block::new("quicksort.scan_right.test", 1),
    Block::new("quicksort.scan_right.bound", 1),
    Block::new("quicksort.partition.cross", 1),
    Block::new("quicksort.partition.exch", 1),
    Block::new("quicksort.partition.finish", 2),
];

fn qs_partition(a: &mut [u8], lo: usize, hi: usize, t: &mut Tracer) -> Probed<usize> {
    t.hit(QS_P_INIT)?;
    let v = a[lo];
    let mut i = lo;
    let mut j = hi + 1;
    loop {
        t.hit(QS_P_LOOP)?;
        loop {
            i += 1;
            t.hit(QS_L_TEST)?;
            if a[i] >= v {
                break;
            }
            t.hit(QS_L_BOUND)?;
            if i == hi {
                break;
            }
        }
        loop {
            j -= 1;
            t.hit(QS_R_TEST)?;
            if v >= a[j] {
                break;
            }
            t.hit(QS_R_BOUND)?;
            if j == lo {
                break;
            }
        }
        t.hit(QS_CROSS)?;
        if i >= j {
            break;
        }
        t.hit(QS_EXCH)?;
        a.swap(i, j);
    }
    t.hit(QS_FINISH)?;
    a.swap(lo, j);
    Ok(j)
}

fn qs_sort(a: &mut [u8], lo: usize, hi: usize, t: &mut Tracer) -> Probed {
    t.hit(QS_ENTRY)?;
    if hi <= lo {
        t.hit(QS_BASE)?;
        return Ok(());
    }
    t.hit(QS_SPLIT)?;
    let j = qs_partition(a, lo, hi, t)?;
    t.hit(QS_LEFT)?;
    if j > 0 {
        qs_sort(a, lo, j - 1, t)?;
    } else {
        t.hit(QS_ENTRY)?;
        t.hit(QS_BASE)?;
    }
    t.hit(QS_RIGHT)?;
    qs_sort(a, j + 1, hi, t)
}

fn quicksort(data: &[u8], t: &mut Tracer) -> Probed {
    let mut a = data.to_vec();
    if a.is_empty() {
        t.hit(QS_ENTRY)?;
        return t.hit(QS_BASE);
    }
    let hi = a.len() - 1;
    qs_sort(&mut a, 0, hi, t)?;
    debug_assert!(a.windows(2).all(|w| w[0] <= w[1]));
    Ok(())
}

pub const QUICKSORT: ByteTarget = ByteTarget {
    name: "quicksort",
    tag: 1,
    blocks: QUICKSORT_BLOCKS,
    min_len: 0,
    max_len: SORT_MAX_LEN,
    run: quicksort,
};

// ------------------------------------------------------------ 3-way quicksort

const Q3_ENTRY: u8 = 0;
const Q3_BASE: u8 = 1;
const Q3_INIT: u8 = 2;
const Q3_TEST: u8 = 3;
const Q3_COMPARE: u8 = 4;
const Q3_LESS: u8 = 5;
const Q3_GREATER: u8 = 6;
const Q3_EQUAL: u8 = 7;
const Q3_LEFT: u8 = 8;
const Q3_RIGHT: u8 = 9;

static QUICK3WAY_BLOCKS: &[Block] = &[
    Block::new("quick3way.sort.entry", 1),
    Block::new("quick3way.sort.base", 1),
    Block::new("quick3way.sort.init", 4),
    Block::new("quick3way.loop.test", 1),
    Block::new("quick3way.loop.compare", 1),
    Block::new("quick3way.loop.less", 2),
    Block::new("quick3way.loop.greater", 2),
    Block::new("quick3way.loop.equal", 1),
    Block::new("quick3way.sort.left", 1),
    Block::new("quick3way.sort.right", 1),
];

fn q3_sort(a: &mut [u8], lo: usize, hi: usize, t: &mut Tracer) -> Probed {
    t.hit(Q3_ENTRY)?;
    if hi <= lo {
        t.hit(Q3_BASE)?;
        return Ok(());
    }
    t.hit(Q3_INIT)?;
    let (mut lt, mut gt, v, mut i) = (lo, hi, a[lo], lo + 1);
    loop {
        t.hit(Q3_TEST)?;
        if i > gt {
            break;
        }
        t.hit(Q3_COMPARE)?;
        match a[i].cmp(&v) {
            std::cmp::Ordering::Less => {
                t.hit(Q3_LESS)?;
                a.swap(lt, i);
                lt += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                t.hit(Q3_GREATER)?;
                a.swap(i, gt);
                gt -= 1;
            }
            std::cmp::Ordering::Equal => {
                t.hit(Q3_EQUAL)?;
                i += 1;
            }
        }
    }
    t.hit(Q3_LEFT)?;
    if lt > 0 {
        q3_sort(a, lo, lt - 1, t)?;
    } else {
        t.hit(Q3_ENTRY)?;
        t.hit(Q3_BASE)?;
    }
    t.hit(Q3_RIGHT)?;
    q3_sort(a, gt + 1, hi, t)
}

fn quick3way(data: &[u8], t: &mut Tracer) -> Probed {
    let mut a = data.to_vec();
    if a.is_empty() {
        t.hit(Q3_ENTRY)?;
        return t.hit(Q3_BASE);
    }
    let hi = a.len() - 1;
    q3_sort(&mut a, 0, hi, t)?;
    debug_assert!(a.windows(2).all(|w| w[0] <= w[1]));
    Ok(())
}

pub const QUICK3WAY: ByteTarget = ByteTarget {
    name: "quick3way",
    tag: 2,
    blocks: QUICK3WAY_BLOCKS,
    min_len: 0,
    max_len: SORT_MAX_LEN,
    run: quick3way,
};

// ---------------------------------------------------------------- merge sort

const MS_ENTRY: u8 = 0;
const MS_BASE: u8 = 1;
const MS_SPLIT: u8 = 2;
const MS_COPY: u8 = 3;
const MS_MERGE_INIT: u8 = 4;
const MS_MERGE_TEST: u8 = 5;
const MS_LEFT_DONE: u8 = 6;
const MS_RIGHT_DONE: u8 = 7;
const MS_COMPARE: u8 = 8;
const MS_TAKE_RIGHT: u8 = 9;
const MS_TAKE_LEFT: u8 = 10;

static MERGESORT_BLOCKS: &[Block] = &[
    Block::new("mergesort.sort.entry", 1),
    Block::new("mergesort.sort.base", 1),
    Block::new("mergesort.sort.split", 4),
    Block::new("mergesort.merge.copy", 2),
    Block::new("mergesort.merge.init", 1),
    Block::new("mergesort.merge.test", 1),
    Block::new("mergesort.merge.left_done", 2),
    Block::new("mergesort.merge.right_done", 2),
    Block::new("mergesort.merge.compare", 1),
    Block::new("mergesort.merge.take_right", 1),
    Block::new("mergesort.merge.take_left", 1),
];

fn ms_merge(a: &mut [u8], aux: &mut [u8], lo: usize, mid: usize, hi: usize, t: &mut Tracer) -> Probed {
    for k in lo..=hi {
        t.hit(MS_COPY)?;
        aux[k] = a[k];
    }
    t.hit(MS_MERGE_INIT)?;
    let (mut i, mut j) = (lo, mid + 1);
    for k in lo..=hi {
        t.hit(MS_MERGE_TEST)?;
        if i > mid {
            t.hit(MS_LEFT_DONE)?;
            a[k] = aux[j];
            j += 1;
        } else if j > hi {
            t.hit(MS_RIGHT_DONE)?;
            a[k] = aux[i];
            i += 1;
        } else {
            t.hit(MS_COMPARE)?;
            if aux[j] < aux[i] {
                t.hit(MS_TAKE_RIGHT)?;
                a[k] = aux[j];
                j += 1;
            } else {
                t.hit(MS_TAKE_LEFT)?;
                a[k] = aux[i];
                i += 1;
            }
        }
    }
    t.hit(MS_MERGE_TEST)
}

fn ms_sort(a: &mut [u8], aux: &mut [u8], lo: usize, hi: usize, t: &mut Tracer) -> Probed {
    t.hit(MS_ENTRY)?;
    if hi <= lo {
        return t.hit(MS_BASE);
    }
    t.hit(MS_SPLIT)?;
    let mid = lo + (hi - lo) / 2;
    ms_sort(a, aux, lo, mid, t)?;
    ms_sort(a, aux, mid + 1, hi, t)?;
    ms_merge(a, aux, lo, mid, hi, t)
}

fn mergesort(data: &[u8], t: &mut Tracer) -> Probed {
    let mut a = data.to_vec();
    let mut aux = vec![0u8; a.len()];
    if a.is_empty() {
        t.hit(MS_ENTRY)?;
        return t.hit(MS_BASE);
    }
    let hi = a.len() - 1;
    ms_sort(&mut a, &mut aux, 0, hi, t)?;
    debug_assert!(a.windows(2).all(|w| w[0] <= w[1]));
    Ok(())
}

pub const MERGESORT: ByteTarget = ByteTarget {
    name: "mergesort",
    tag: 4,
    blocks: MERGESORT_BLOCKS,
    min_len: 0,
    max_len: SORT_MAX_LEN,
    run: mergesort,
};
