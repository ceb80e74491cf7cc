//! Exhaustive check of the greedy minimal-block decomposition.
//!
//! Walks every pair of words of equal length over `d` letters, pruning
//! branches whose letter-count difference can no longer return to zero.
//! Along the way the reference counts decompositions by dynamic programming
//! over all cut points: a piece `[i, j)` is allowed when the prefix
//! differences at `i` and `j` agree and no difference strictly between them
//! repeats the one at `i`. A correct pair has exactly one decomposition and
//! its cuts must equal the greedy ones.

use std::thread;

pub struct SweepReport {
    pub pairs: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<(Vec<u8>, Vec<u8>)>,
}

impl SweepReport {
    fn empty() -> Self {
        Self {
            pairs: 0,
            mismatches: 0,
            first_mismatch: None,
        }
    }

    fn merge(&mut self, other: SweepReport) {
        self.pairs += other.pairs;
        self.mismatches += other.mismatches;
        if self.first_mismatch.is_none() {
            self.first_mismatch = other.first_mismatch;
        }
    }
}

const MAX_SWEEP_LETTERS: usize = 4;
const MAX_SWEEP_LEN: usize = 24;

struct Walk<F> {
    d: usize,
    max_len: usize,
    top: [u8; MAX_SWEEP_LEN],
    bottom: [u8; MAX_SWEEP_LEN],
    /// Current l(top) - l(bottom).
    counts: [i32; MAX_SWEEP_LETTERS],
    /// A difference vector is identified by its first d-1 coordinates,
    /// packed in base 2*max_len+1; the last letter has stride 0.
    stride: [isize; MAX_SWEEP_LETTERS],
    zero: usize,
    /// keys[k] identifies l(top[..k]) - l(bottom[..k]).
    keys: [usize; MAX_SWEEP_LEN + 1],
    /// Positions on the current path, grouped by key.
    positions: Vec<u32>,
    /// Bit `i` of blocked[j] is set when some m in (i, j) has keys[m] == keys[i].
    blocked: [u32; MAX_SWEEP_LEN + 1],
    ways: [u64; MAX_SWEEP_LEN + 1],
    pred: [usize; MAX_SWEEP_LEN + 1],
    greedy: F,
    cuts: Vec<usize>,
    report: SweepReport,
}

impl<F: FnMut(&[u8], &[u8], &mut Vec<usize>)> Walk<F> {
    fn new(d: usize, max_len: usize, greedy: F) -> Self {
        let base = 2 * max_len + 1;
        let mut stride = [0; MAX_SWEEP_LETTERS];
        let mut zero = 0;
        let mut place = 1;
        for s in stride.iter_mut().take(d - 1) {
            *s = place as isize;
            zero += max_len * place;
            place *= base;
        }
        let mut positions = vec![0; place];
        positions[zero] = 1;
        let mut keys = [0; MAX_SWEEP_LEN + 1];
        keys[0] = zero;
        let mut ways = [0; MAX_SWEEP_LEN + 1];
        ways[0] = 1;
        Self {
            d,
            max_len,
            top: [0; MAX_SWEEP_LEN],
            bottom: [0; MAX_SWEEP_LEN],
            counts: [0; MAX_SWEEP_LETTERS],
            stride,
            zero,
            keys,
            positions,
            blocked: [0; MAX_SWEEP_LEN + 1],
            ways,
            pred: [usize::MAX; MAX_SWEEP_LEN + 1],
            greedy,
            cuts: Vec::new(),
            report: SweepReport::empty(),
        }
    }

    /// Appends `(a, b)` at position `n` and walks the subtree below.
    fn descend(&mut self, n: usize, excess: usize, a: u8, b: u8) {
        let (ai, bi) = (a as usize, b as usize);
        self.top[n] = a;
        self.bottom[n] = b;
        self.counts[ai] += 1;
        self.counts[bi] -= 1;
        let key = (self.keys[n] as isize + self.stride[ai] - self.stride[bi]) as usize;
        self.extend(n + 1, key);
        self.visit(n + 1, excess);
        self.positions[key] &= !(1 << (n + 1));
        self.counts[ai] -= 1;
        self.counts[bi] += 1;
    }

    /// `excess` is the sum of the positive differences at `n`; a child is
    /// kept only if it can still balance by `max_len`.
    fn visit(&mut self, n: usize, excess: usize) {
        if n > 0 && self.keys[n] == self.zero {
            self.check(n);
        }
        if n == self.max_len {
            return;
        }
        let slack = self.max_len - n - 1;
        for a in 0..self.d as u8 {
            let grows = (self.counts[a as usize] >= 0) as usize;
            for b in 0..self.d as u8 {
                let next = if a == b {
                    excess
                } else {
                    excess + grows - (self.counts[b as usize] > 0) as usize
                };
                if next <= slack {
                    self.descend(n, next, a, b);
                }
            }
        }
    }

    fn extend(&mut self, j: usize, key: usize) {
        self.keys[j] = key;
        let newest = self.positions[self.keys[j - 1]] & !(1 << (j - 1));
        let blocked = self.blocked[j - 1] | newest;
        self.blocked[j] = blocked;
        let mut candidates = self.positions[key] & !blocked;
        let (mut total, mut last) = (0, usize::MAX);
        while candidates != 0 {
            let i = candidates.trailing_zeros() as usize;
            candidates &= candidates - 1;
            if self.ways[i] > 0 {
                total += self.ways[i];
                last = i;
            }
        }
        self.ways[j] = total;
        self.pred[j] = last;
        self.positions[key] |= 1 << j;
    }

    fn check(&mut self, n: usize) {
        self.report.pairs += 1;
        (self.greedy)(&self.top[..n], &self.bottom[..n], &mut self.cuts);
        if !self.agrees(n) {
            self.report.mismatches += 1;
            if self.report.first_mismatch.is_none() {
                self.report.first_mismatch = Some((self.top[..n].to_vec(), self.bottom[..n].to_vec()));
            }
        }
    }

    /// The unique decomposition, read backwards through `pred`, must match
    /// the greedy cuts.
    fn agrees(&self, n: usize) -> bool {
        if self.ways[n] != 1 {
            return false;
        }
        let mut j = n;
        for &cut in self.cuts.iter().rev() {
            if cut != j {
                return false;
            }
            j = self.pred[j];
        }
        j == 0
    }
}

/// Every balanced pair of length `1..=max_len` over `d` letters is passed to
/// `greedy`, which must write the end positions of its blocks into the
/// vector. Subtrees under each first letter pair are spread over threads.
pub fn sweep<F>(d: usize, max_len: usize, greedy: F) -> SweepReport
where
    F: FnMut(&[u8], &[u8], &mut Vec<usize>) + Clone + Send,
{
    assert!((1..=MAX_SWEEP_LETTERS).contains(&d) && max_len <= MAX_SWEEP_LEN);
    let mut report = SweepReport::empty();
    if max_len == 0 {
        return report;
    }
    let firsts: Vec<(u8, u8)> = (0..d as u8)
        .flat_map(|a| (0..d as u8).map(move |b| (a, b)))
        .collect();
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(firsts.len());
    let parts: Vec<SweepReport> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let greedy = greedy.clone();
                let mine: Vec<(u8, u8)> = firsts.iter().copied().skip(w).step_by(workers).collect();
                s.spawn(move || {
                    let mut walk = Walk::new(d, max_len, greedy);
                    for (a, b) in mine {
                        let excess = (a != b) as usize;
                        if excess < max_len {
                            walk.descend(0, excess, a, b);
                        }
                    }
                    walk.report
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    for part in parts {
        report.merge(part);
    }
    report
}
