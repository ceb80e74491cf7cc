//! Helpers shared by the integration tests and the acceptance run. The
//! reference implementations here work on plain strings and never call
//! into the library.
#![allow(dead_code)]

pub mod sweep;

use std::collections::HashMap;
use std::path::PathBuf;

use rauzy_core::cli::read_substitution;
use rauzy_core::word::Substitution;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(format!("{name}.sub"))
}

pub fn load(name: &str) -> Substitution {
    read_substitution(&data(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every worked example substitution that has an
/// irreducible Pisot matrix.
pub const PISOT_EXAMPLES: [&str; 11] = [
    "trib1",
    "trib2",
    "tau1",
    "tau2",
    "chi1",
    "chi2",
    "delta3_1",
    "delta3_2",
    "delta4_1",
    "delta4_2",
    "fibonacci",
];

pub type Rules = HashMap<char, String>;

pub fn rules(pairs: &[(char, &str)]) -> Rules {
    pairs.iter().map(|&(c, w)| (c, w.to_string())).collect()
}

pub fn apply(r: &Rules, w: &str) -> String {
    w.chars().map(|c| r[&c].as_str()).collect()
}

pub fn iterate(r: &Rules, w: &str, n: usize) -> String {
    (0..n).fold(w.to_string(), |acc, _| apply(r, &acc))
}

/// Prefix of length `n` of the fixed point of `r` starting with `seed`,
/// which must begin its own image.
pub fn fixed_point(r: &Rules, seed: char, n: usize) -> String {
    assert!(r[&seed].starts_with(seed) && r[&seed].len() > 1);
    let mut w = seed.to_string();
    while w.len() < n {
        w = apply(r, &w);
    }
    w.truncate(n);
    w
}

pub fn counts(w: &str) -> HashMap<char, i64> {
    let mut m = HashMap::new();
    for c in w.chars() {
        *m.entry(c).or_insert(0) += 1;
    }
    m
}

pub const TAU1: [(char, &str); 2] = [('a', "aba"), ('b', "ab")];
pub const TAU2: [(char, &str); 2] = [('a', "aab"), ('b', "ba")];
pub const TRIB1: [(char, &str); 3] = [('a', "ab"), ('b', "ac"), ('c', "a")];
pub const TRIB2: [(char, &str); 3] = [('a', "ab"), ('b', "ca"), ('c', "a")];
pub const CHI1: [(char, &str); 2] = [('a', "aab"), ('b', "ab")];
pub const CHI2: [(char, &str); 2] = [('a', "baa"), ('b', "ba")];

/// A block morphism as a pair of tables: `(name, top, bottom)` and
/// `(name, image)`.
pub struct Table {
    pub pi: Vec<(String, String, String)>,
    pub phi: Vec<(String, String)>,
}

impl Table {
    fn new(pi: &[(&str, &str, &str)], phi: &[(&str, &str)]) -> Self {
        Self {
            pi: pi
                .iter()
                .map(|&(x, t, b)| (x.into(), t.into(), b.into()))
                .collect(),
            phi: phi.iter().map(|&(x, w)| (x.into(), w.into())).collect(),
        }
    }

    /// The morphism file format written by `intersect`.
    pub fn text(&self) -> String {
        let mut s = String::new();
        for (x, t, b) in &self.pi {
            s += &format!("block {x} = {t} | {b}\n");
        }
        for (x, w) in &self.phi {
            s += &format!("phi {x} -> {w}\n");
        }
        s
    }

    pub fn pi_of(&self, x: char) -> (&str, &str) {
        let (_, t, b) = self.pi.iter().find(|(n, _, _)| n.starts_with(x)).unwrap();
        (t, b)
    }

    pub fn phi_rules(&self) -> Rules {
        self.phi
            .iter()
            .map(|(x, w)| (x.chars().next().unwrap(), w.clone()))
            .collect()
    }

    /// Concatenation of the tops and bottoms of a word over single-letter
    /// block names.
    pub fn flatten(&self, w: &str) -> (String, String) {
        let (mut t, mut b) = (String::new(), String::new());
        for x in w.chars() {
            let (pt, pb) = self.pi_of(x);
            t += pt;
            b += pb;
        }
        (t, b)
    }
}

pub fn tau_table() -> Table {
    Table::new(
        &[
            ("A", "a", "a"),
            ("B", "ba", "ab"),
            ("C", "b", "b"),
            ("D", "ab", "ba"),
        ],
        &[("A", "AB"), ("B", "ABCA"), ("C", "D"), ("D", "DAAC")],
    )
}

pub fn tribonacci_table() -> Table {
    Table::new(
        &[
            ("A", "a", "a"),
            ("B", "b", "b"),
            ("C", "ac", "ca"),
            ("D", "ba", "ab"),
            ("E", "cab", "bca"),
            ("F", "aabac", "caaab"),
            ("G", "cab", "abc"),
            ("H", "abac", "bcaa"),
            ("I", "abaca", "caaab"),
            ("J", "cabaab", "ababca"),
            ("K", "ababac", "bcaaab"),
        ],
        &[
            ("A", "AB"),
            ("B", "C"),
            ("C", "AD"),
            ("D", "AE"),
            ("E", "F"),
            ("F", "ADDGA"),
            ("G", "AH"),
            ("H", "ID"),
            ("I", "ADJ"),
            ("J", "AHK"),
            ("K", "IDGA"),
        ],
    )
}

fn pow(w: &str, n: usize) -> String {
    w.repeat(n)
}

pub fn delta_rules(i: usize) -> (Rules, Rules) {
    let a = |n: usize| pow("a", n);
    (
        [('a', a(i) + "b"), ('b', a(i - 1) + "c"), ('c', "a".into())]
            .into_iter()
            .collect(),
        [
            ('a', "ab".to_string() + &a(i - 1)),
            ('b', "ac".to_string() + &a(i - 2)),
            ('c', "a".into()),
        ]
        .into_iter()
        .collect(),
    )
}

/// The block morphism of the pair `δᵢ¹, δᵢ²` from its closed form.
pub fn delta_table(i: usize) -> Table {
    assert!(i >= 3);
    let a = |n: usize| pow("a", n);
    let aad = |n: usize| pow("AAD", n);
    let c_img = format!(
        "{}{}AAE{}A",
        aad(i - 1),
        pow(&format!("AAE{}", aad(i)), i - 2),
        aad(i - 1)
    );
    let f_img = format!(
        "{}{}AAE{}A",
        aad(i - 1),
        pow(&format!("AAE{}", aad(i)), i - 3),
        aad(i - 1)
    );
    let e_img = format!("{}A", aad(i - 3));
    let c_top = format!("{}b{}{}c", a(i - 1), pow(&(a(i) + "b"), i - 2), a(i - 1));
    let c_bot = format!(
        "c{}{}b{}",
        a(i - 1),
        pow(&("b".to_string() + &a(i)), i - 2),
        a(i - 1)
    );
    let f_top = format!("{}b{}{}c", a(i - 1), pow(&(a(i) + "b"), i - 3), a(i - 1));
    let f_bot = format!(
        "c{}{}b{}",
        a(i - 1),
        pow(&("b".to_string() + &a(i)), i - 3),
        a(i - 1)
    );
    Table {
        pi: vec![
            ("A".into(), "a".into(), "a".into()),
            ("B".into(), a(i - 1) + "b", "b".to_string() + &a(i - 1)),
            ("C".into(), c_top, c_bot),
            ("D".into(), a(i - 2) + "b", "b".to_string() + &a(i - 2)),
            ("E".into(), a(i - 3) + "c", "c".to_string() + &a(i - 3)),
            ("F".into(), f_top, f_bot),
        ],
        phi: vec![
            ("A".into(), "AB".into()),
            ("B".into(), "AC".into()),
            ("C".into(), c_img),
            ("D".into(), "AF".into()),
            ("E".into(), e_img),
            ("F".into(), f_img),
        ],
    }
}

/// Morphism lines (`block ...` and `phi ...`) of an `intersect` report.
pub fn morphism_section(stdout: &str) -> String {
    stdout
        .lines()
        .filter(|l| l.starts_with("block ") || l.starts_with("phi "))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// The real root of X³ - X² - X - 1 by bisection, then Newton.
pub fn tribonacci_constant() -> f64 {
    let p = |x: f64| x * x * x - x * x - x - 1.0;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        x -= p(x) / (3.0 * x * x - 2.0 * x - 1.0);
    }
    x
}

/// Independent decomposition of a balanced pair by trying every subset of
/// cut points; returns every valid decomposition.
pub fn all_decompositions(top: &[u8], bottom: &[u8]) -> Vec<Vec<usize>> {
    let n = top.len();
    assert!((1..=20).contains(&n) && bottom.len() == n);
    let balanced = |i: usize, j: usize| {
        let mut t = top[i..j].to_vec();
        let mut b = bottom[i..j].to_vec();
        t.sort_unstable();
        b.sort_unstable();
        t == b
    };
    let minimal = |i: usize, j: usize| balanced(i, j) && (i + 1..j).all(|m| !balanced(i, m));
    let mut out = Vec::new();
    for mask in 0u32..1 << (n - 1) {
        let mut cuts: Vec<usize> = (1..n).filter(|k| mask & (1 << (k - 1)) != 0).collect();
        cuts.push(n);
        let mut start = 0;
        if cuts.iter().all(|&end| {
            let ok = minimal(start, end);
            start = end;
            ok
        }) {
            out.push(cuts);
        }
    }
    out
}
