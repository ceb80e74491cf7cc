//! Words, substitutions and their exact combinatorics.
//!
//! Letters are stored as indices into an [`Alphabet`]; the alphabet order
//! fixes the coordinate order of every abelian vector and matrix.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Deref, Sub};

use crate::error::{Error, Result};

/// Index of a symbol in its alphabet.
pub type Letter = u8;

/// Largest alphabet supported by the `u8` letter encoding.
pub const MAX_LETTERS: usize = 255;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: Vec<char>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::validation("alphabet is empty"));
        }
        if symbols.len() > MAX_LETTERS {
            return Err(Error::validation(format!(
                "alphabet has {} letters, at most {MAX_LETTERS} supported",
                symbols.len()
            )));
        }
        for (i, c) in symbols.iter().enumerate() {
            if c.is_whitespace() {
                return Err(Error::validation("alphabet letters must not be whitespace"));
            }
            if symbols[..i].contains(c) {
                return Err(Error::validation(format!("duplicate letter '{c}'")));
            }
        }
        Ok(Self { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn symbol(&self, letter: Letter) -> char {
        self.symbols[letter as usize]
    }

    pub fn index_of(&self, c: char) -> Option<Letter> {
        self.symbols.iter().position(|&s| s == c).map(|i| i as Letter)
    }

    /// Parses a string of symbols into a word over this alphabet.
    pub fn word(&self, text: &str) -> Result<Word> {
        text.chars()
            .map(|c| {
                self.index_of(c)
                    .ok_or_else(|| Error::validation(format!("letter '{c}' is not in the alphabet")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn spell(&self, w: &[Letter]) -> String {
        w.iter().map(|&l| self.symbol(l)).collect()
    }
}

/// A finite word, stored as letter indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn into_inner(self) -> Vec<Letter> {
        self.0
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn extend_from_slice(&mut self, w: &[Letter]) {
        self.0.extend_from_slice(w);
    }
}

impl Deref for Word {
    type Target = [Letter];

    fn deref(&self) -> &[Letter] {
        &self.0
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Self(v)
    }
}

impl From<&[Letter]> for Word {
    fn from(v: &[Letter]) -> Self {
        Self(v.to_vec())
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Letter occurrence counts, one coordinate per alphabet letter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbelianVector(Vec<i64>);

impl AbelianVector {
    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn unit(d: usize, letter: Letter) -> Self {
        let mut v = vec![0; d];
        v[letter as usize] = 1;
        Self(v)
    }

    pub fn from_counts(counts: Vec<i64>) -> Self {
        Self(counts)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub(crate) fn bump(&mut self, letter: Letter) {
        self.0[letter as usize] += 1;
    }
}

impl Add for &AbelianVector {
    type Output = AbelianVector;

    fn add(self, rhs: &AbelianVector) -> AbelianVector {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        AbelianVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &AbelianVector {
    type Output = AbelianVector;

    fn sub(self, rhs: &AbelianVector) -> AbelianVector {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        AbelianVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for AbelianVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Abelianization of `w` over an alphabet of `d` letters.
pub fn abelianize(w: &[Letter], d: usize) -> Result<AbelianVector> {
    let mut v = AbelianVector::zero(d);
    for &l in w {
        if l as usize >= d {
            return Err(Error::validation(format!(
                "letter index {l} outside alphabet of size {d}"
            )));
        }
        v.bump(l);
    }
    Ok(v)
}

/// Square integer matrix with `M[i][j] = |σ(j)|_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceMatrix {
    d: usize,
    entries: Vec<i64>,
}

impl IncidenceMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::validation("matrix must be square and nonempty"));
        }
        Ok(Self {
            d,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn identity(d: usize) -> Self {
        let mut entries = vec![0; d * d];
        for i in 0..d {
            entries[i * d + i] = 1;
        }
        Self { d, entries }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.d + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.d).map(<[i64]>::to_vec).collect()
    }

    pub fn column_sum(&self, j: usize) -> i64 {
        (0..self.d).map(|i| self.get(i, j)).sum()
    }

    pub fn trace(&self) -> i64 {
        (0..self.d).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, x: &AbelianVector) -> AbelianVector {
        assert_eq!(x.dim(), self.d, "dimension mismatch");
        AbelianVector(
            (0..self.d)
                .map(|i| (0..self.d).map(|j| self.get(i, j) * x.0[j]).sum())
                .collect(),
        )
    }

    pub fn mul(&self, rhs: &IncidenceMatrix) -> IncidenceMatrix {
        assert_eq!(self.d, rhs.d, "dimension mismatch");
        let d = self.d;
        let mut entries = vec![0i64; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += a * rhs.get(k, j);
                }
            }
        }
        IncidenceMatrix { d, entries }
    }

    /// Relabels the alphabet: entry `(i, j)` of the result is entry
    /// `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> IncidenceMatrix {
        let d = self.d;
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = self.get(perm[i], perm[j]);
            }
        }
        IncidenceMatrix { d, entries }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> i128 {
        let d = self.d;
        let mut a: Vec<Vec<i128>> = self
            .entries
            .chunks(d)
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..d {
            if a[k][k] == 0 {
                match (k + 1..d).find(|&r| a[r][k] != 0) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        sign * a[d - 1][d - 1]
    }

    /// Whether some power `M^k` with `k ≤ cap` is entrywise positive.
    /// Only the zero pattern matters, so powers are tracked as booleans.
    pub fn is_primitive(&self, cap: usize) -> bool {
        let d = self.d;
        let base: Vec<bool> = self.entries.iter().map(|&x| x > 0).collect();
        let mut power = base.clone();
        for _ in 0..cap.max(1) {
            if power.iter().all(|&p| p) {
                return true;
            }
            let mut next = vec![false; d * d];
            for i in 0..d {
                for k in 0..d {
                    if !power[i * d + k] {
                        continue;
                    }
                    for j in 0..d {
                        next[i * d + j] |= base[k * d + j];
                    }
                }
            }
            power = next;
        }
        false
    }

    /// Wielandt's bound `(d−1)² + 1` on the primitivity exponent.
    pub fn wielandt_bound(&self) -> usize {
        (self.d - 1) * (self.d - 1) + 1
    }
}

impl fmt::Display for IncidenceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.d).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    alphabet: Alphabet,
    images: Vec<Word>,
}

impl Substitution {
    pub fn new(alphabet: Alphabet, images: Vec<Word>) -> Result<Self> {
        if images.len() != alphabet.len() {
            return Err(Error::validation(format!(
                "{} images for {} letters",
                images.len(),
                alphabet.len()
            )));
        }
        let d = alphabet.len();
        for (j, img) in images.iter().enumerate() {
            if img.is_empty() {
                return Err(Error::validation(format!(
                    "image of '{}' is empty",
                    alphabet.symbol(j as Letter)
                )));
            }
            if img.iter().any(|&l| l as usize >= d) {
                return Err(Error::validation("image contains a letter outside the alphabet"));
            }
        }
        Ok(Self { alphabet, images })
    }

    /// Builds a substitution from `(letter, image)` rules; the alphabet is
    /// ordered as the rules are.
    pub fn from_rules(rules: &[(char, &str)]) -> Result<Self> {
        let alphabet = Alphabet::new(rules.iter().map(|r| r.0).collect())?;
        let images = rules
            .iter()
            .map(|(_, img)| alphabet.word(img))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, images)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Same substitution with its letters reindexed to follow `target`,
    /// which must contain exactly the same symbols.
    pub fn relabel_to(&self, target: &Alphabet) -> Result<Substitution> {
        if target.len() != self.dim() {
            return Err(Error::validation("alphabets differ in size"));
        }
        let map: Vec<Letter> = self
            .alphabet
            .symbols()
            .iter()
            .map(|&c| {
                target
                    .index_of(c)
                    .ok_or_else(|| Error::validation(format!("letter '{c}' missing from target alphabet")))
            })
            .collect::<Result<_>>()?;
        let mut images = vec![Word::new(); self.dim()];
        for (old, img) in self.images.iter().enumerate() {
            images[map[old] as usize] = img.iter().map(|&l| map[l as usize]).collect();
        }
        Substitution::new(target.clone(), images)
    }

    pub fn dim(&self) -> usize {
        self.alphabet.len()
    }

    pub fn image(&self, letter: Letter) -> &Word {
        &self.images[letter as usize]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn apply(&self, w: &[Letter]) -> Result<Word> {
        let d = self.dim();
        let mut out = Vec::with_capacity(w.len() * 2);
        for &l in w {
            if l as usize >= d {
                return Err(Error::validation(format!(
                    "letter index {l} outside alphabet of size {d}"
                )));
            }
            out.extend_from_slice(&self.images[l as usize]);
        }
        Ok(Word(out))
    }

    pub(crate) fn apply_into(&self, w: &[Letter], out: &mut Vec<Letter>) {
        for &l in w {
            out.extend_from_slice(&self.images[l as usize]);
        }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Substitution) -> Result<Substitution> {
        if self.alphabet != other.alphabet {
            return Err(Error::validation(
                "cannot compose substitutions over different alphabets",
            ));
        }
        let images = other
            .images
            .iter()
            .map(|img| self.apply(img))
            .collect::<Result<Vec<_>>>()?;
        Substitution::new(self.alphabet.clone(), images)
    }

    /// `σ^k`; `σ^0` is the identity.
    pub fn power(&self, k: u32) -> Substitution {
        let mut images: Vec<Word> = (0..self.dim() as Letter).map(|l| Word(vec![l])).collect();
        for _ in 0..k {
            images = images
                .iter()
                .map(|img| {
                    let mut out = Vec::new();
                    self.apply_into(img, &mut out);
                    Word(out)
                })
                .collect();
        }
        Substitution {
            alphabet: self.alphabet.clone(),
            images,
        }
    }

    pub fn incidence_matrix(&self) -> IncidenceMatrix {
        let d = self.dim();
        let mut entries = vec![0i64; d * d];
        for (j, img) in self.images.iter().enumerate() {
            for &i in img.iter() {
                entries[i as usize * d + j] += 1;
            }
        }
        IncidenceMatrix { d, entries }
    }

    pub fn is_primitive(&self) -> bool {
        let m = self.incidence_matrix();
        m.is_primitive(m.wielandt_bound())
    }

    /// Smallest `k ≤ kcap`, then smallest letter `a`, such that `σ^k(a)`
    /// begins with `a` and has length at least 2.
    pub fn periodic_seed(&self, kcap: u32) -> Result<(u32, Letter)> {
        let d = self.dim();
        // σ^k(a) starts with first^k(a), where first(a) is the first letter of σ(a).
        let first: Vec<Letter> = self.images.iter().map(|img| img[0]).collect();
        let mut current: Vec<Letter> = (0..d as Letter).collect();
        let mut lengths: Vec<u128> = vec![1; d];
        for k in 1..=kcap {
            for a in 0..d {
                current[a] = first[current[a] as usize];
            }
            lengths = (0..d)
                .map(|a| {
                    self.images[a]
                        .iter()
                        .map(|&l| lengths[l as usize])
                        .fold(0u128, u128::saturating_add)
                })
                .collect();
            if let Some(a) = (0..d).find(|&a| current[a] as usize == a && lengths[a] >= 2) {
                return Ok((k, a as Letter));
            }
        }
        Err(Error::validation(format!("no periodic seed within k ≤ {kcap}")))
    }

    pub fn default_periodic_cap(&self) -> u32 {
        (1..=self.dim() as u64).product::<u64>().min(u32::MAX as u64) as u32
    }

    pub fn periodic_point(&self, kcap: u32) -> Result<FixedPointStream> {
        let (k, seed) = self.periodic_seed(kcap)?;
        Ok(FixedPointStream::new(self.power(k), k, seed))
    }

    /// One edge per letter position in every image.
    pub fn prefix_suffix_automaton(&self) -> PrefixSuffixAutomaton {
        let mut edges = Vec::new();
        for (b, img) in self.images.iter().enumerate() {
            for (pos, &a) in img.iter().enumerate() {
                edges.push(AutomatonEdge {
                    image_of: b as Letter,
                    position: pos,
                    prefix: Word(img[..pos].to_vec()),
                    letter: a,
                    suffix: Word(img[pos + 1..].to_vec()),
                });
            }
        }
        PrefixSuffixAutomaton {
            vertices: self.dim(),
            edges,
        }
    }
}

/// Prefix-suffix automaton: for `σ(b) = p·a·s` there is an edge from `a`
/// to `b` labeled `(p, a, s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixSuffixAutomaton {
    pub vertices: usize,
    pub edges: Vec<AutomatonEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomatonEdge {
    /// The letter `b` whose image contains this position.
    pub image_of: Letter,
    pub position: usize,
    pub prefix: Word,
    /// The letter `a` at this position.
    pub letter: Letter,
    pub suffix: Word,
}

impl AutomatonEdge {
    pub fn from(&self) -> Letter {
        self.letter
    }

    pub fn to(&self) -> Letter {
        self.image_of
    }
}

impl PrefixSuffixAutomaton {
    pub fn outgoing(&self, from: Letter) -> impl Iterator<Item = &AutomatonEdge> {
        self.edges.iter().filter(move |e| e.letter == from)
    }
}

/// Lazily expanded one-sided fixed point of `σ^k` seeded at a letter.
///
/// The buffer always holds `σ^k(u[..expanded])`, a prefix of the fixed
/// point; extension expands the next letter and never rewrites output.
#[derive(Clone, Debug)]
pub struct FixedPointStream {
    generator: Substitution,
    power: u32,
    seed: Letter,
    buffer: Vec<Letter>,
    expanded: usize,
}

impl FixedPointStream {
    fn new(generator: Substitution, power: u32, seed: Letter) -> Self {
        let buffer = generator.image(seed).to_vec();
        debug_assert!(buffer[0] == seed && buffer.len() >= 2);
        Self {
            generator,
            power,
            seed,
            buffer,
            expanded: 1,
        }
    }

    /// Fixed point of `generator` seeded at `seed`. `generator(seed)` must
    /// begin with `seed` and have length at least 2.
    pub fn from_generator(generator: Substitution, power: u32, seed: Letter) -> Result<Self> {
        let img = generator.image(seed);
        if img[0] != seed || img.len() < 2 {
            return Err(Error::validation(
                "seed letter does not start a growing fixed point",
            ));
        }
        Ok(Self::new(generator, power, seed))
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn seed(&self) -> Letter {
        self.seed
    }

    pub fn generator(&self) -> &Substitution {
        &self.generator
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.generator.alphabet()
    }

    /// Letters currently materialized.
    pub fn available(&self) -> &[Letter] {
        &self.buffer
    }

    pub fn prefix(&mut self, n: usize) -> &[Letter] {
        while self.buffer.len() < n {
            let l = self.buffer[self.expanded];
            self.buffer.extend_from_slice(&self.generator.images[l as usize]);
            self.expanded += 1;
        }
        &self.buffer[..n]
    }

    pub fn letter_at(&mut self, i: usize) -> Letter {
        self.prefix(i + 1)[i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoincidenceSide {
    Prefix,
    Suffix,
}

/// Evidence that `σ^k(b₁) = p₁·a·s₁` and `σ^k(b₂) = p₂·a·s₂` with equal
/// prefix (or suffix) abelianizations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoincidenceWitness {
    pub k: u32,
    pub letter: Letter,
    pub first_position: usize,
    pub second_position: usize,
    pub side: CoincidenceSide,
}

#[derive(Clone, Debug)]
pub struct CoincidenceReport {
    pub holds: bool,
    /// Set when some pair has no witness within the search bound; the
    /// condition is then neither confirmed nor refuted.
    pub inconclusive: bool,
    pub witnesses: BTreeMap<(Letter, Letter), CoincidenceWitness>,
    pub unresolved: Vec<(Letter, Letter)>,
    pub kcap: u32,
}

/// Words longer than this stop the coincidence search for a pair.
const COINCIDENCE_LENGTH_LIMIT: usize = 1 << 22;

/// Searches, for every unordered pair of letters, the smallest `k ≤ kcap`
/// with a strong coincidence witness.
pub fn strong_coincidence(sigma: &Substitution, kcap: u32) -> CoincidenceReport {
    let d = sigma.dim();
    let mut witnesses = BTreeMap::new();
    let mut unresolved = Vec::new();
    let mut pending: Vec<(Letter, Letter)> = Vec::new();
    for b1 in 0..d as Letter {
        witnesses.insert(
            (b1, b1),
            CoincidenceWitness {
                k: 0,
                letter: b1,
                first_position: 0,
                second_position: 0,
                side: CoincidenceSide::Prefix,
            },
        );
        for b2 in b1 + 1..d as Letter {
            pending.push((b1, b2));
        }
    }

    let mut iterates: Vec<Vec<Letter>> = (0..d as Letter).map(|l| vec![l]).collect();
    for k in 1..=kcap {
        if pending.is_empty() {
            break;
        }
        if iterates.iter().any(|w| w.len() > COINCIDENCE_LENGTH_LIMIT) {
            break;
        }
        iterates = iterates
            .iter()
            .map(|w| {
                let mut out = Vec::new();
                sigma.apply_into(w, &mut out);
                out
            })
            .collect();
        pending.retain(
            |&(b1, b2)| match coincidence_at(&iterates[b1 as usize], &iterates[b2 as usize], d) {
                Some((letter, p1, p2, side)) => {
                    witnesses.insert(
                        (b1, b2),
                        CoincidenceWitness {
                            k,
                            letter,
                            first_position: p1,
                            second_position: p2,
                            side,
                        },
                    );
                    false
                }
                None => true,
            },
        );
    }
    unresolved.extend(pending);
    CoincidenceReport {
        holds: unresolved.is_empty(),
        inconclusive: !unresolved.is_empty(),
        witnesses,
        unresolved,
        kcap,
    }
}

/// Equal prefix abelianizations force equal prefix lengths, so it is
/// enough to compare the two words position by position from either end.
fn coincidence_at(w1: &[Letter], w2: &[Letter], d: usize) -> Option<(Letter, usize, usize, CoincidenceSide)> {
    let mut diff = vec![0i64; d];
    let mut nonzero = 0usize;
    let step = |diff: &mut [i64], nonzero: &mut usize, l: usize, delta: i64| {
        let before = diff[l] != 0;
        diff[l] += delta;
        let after = diff[l] != 0;
        match (before, after) {
            (false, true) => *nonzero += 1,
            (true, false) => *nonzero -= 1,
            _ => {}
        }
    };
    for i in 0..w1.len().min(w2.len()) {
        if nonzero == 0 && w1[i] == w2[i] {
            return Some((w1[i], i, i, CoincidenceSide::Prefix));
        }
        step(&mut diff, &mut nonzero, w1[i] as usize, 1);
        step(&mut diff, &mut nonzero, w2[i] as usize, -1);
    }
    diff.iter_mut().for_each(|x| *x = 0);
    nonzero = 0;
    let (n1, n2) = (w1.len(), w2.len());
    for i in 0..n1.min(n2) {
        let (i1, i2) = (n1 - 1 - i, n2 - 1 - i);
        if nonzero == 0 && w1[i1] == w2[i2] {
            return Some((w1[i1], i1, i2, CoincidenceSide::Suffix));
        }
        step(&mut diff, &mut nonzero, w1[i1] as usize, 1);
        step(&mut diff, &mut nonzero, w2[i2] as usize, -1);
    }
    None
}
