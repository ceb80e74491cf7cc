//! Balanced blocks and the morphism generating the common points of two
//! substitutions with the same incidence matrix.
//!
//! Two fixed points `u`, `v` share a vertex of their stepped lines exactly
//! at the lengths `k` where `l(u[..k]) = l(v[..k])`. Cutting both words at
//! those lengths splits the pair `(u, v)` into minimal balanced blocks.
//! Applying `(σ₁, σ₂)` to a block gives a balanced pair again, which splits
//! uniquely into minimal blocks; closing this under iteration from the
//! first block yields a substitution `φ` on blocks with
//! `π(φⁿ(A)) = (σ₁ⁿ(v₁), σ₂ⁿ(v₂))`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fractal::PointCloud;
use crate::spectral::{classify, PerronData};
use crate::word::{abelianize, Alphabet, FixedPointStream, Letter, Substitution, Word};

/// A pair of words with equal abelianizations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BalancedBlock {
    pub top: Word,
    pub bottom: Word,
}

impl BalancedBlock {
    pub fn new(top: Word, bottom: Word, d: usize) -> Result<Self> {
        if !is_balanced(&top, &bottom, d) {
            return Err(Error::validation("block is not balanced"));
        }
        Ok(Self { top, bottom })
    }

    pub fn empty() -> Self {
        Self {
            top: Word::new(),
            bottom: Word::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.top.len()
    }

    pub fn is_empty(&self) -> bool {
        self.top.is_empty()
    }

    pub fn is_minimal(&self, d: usize) -> bool {
        is_minimal(&self.top, &self.bottom, d)
    }

    pub fn spell(&self, alphabet: &Alphabet) -> (String, String) {
        (alphabet.spell(&self.top), alphabet.spell(&self.bottom))
    }
}

/// A balanced block none of whose proper prefix pairs is balanced.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MinimalBalancedBlock(BalancedBlock);

impl MinimalBalancedBlock {
    pub fn new(block: BalancedBlock, d: usize) -> Result<Self> {
        if block.is_empty() || !block.is_minimal(d) {
            return Err(Error::validation("block is not minimal"));
        }
        Ok(Self(block))
    }

    pub fn block(&self) -> &BalancedBlock {
        &self.0
    }

    pub fn into_block(self) -> BalancedBlock {
        self.0
    }
}

impl std::ops::Deref for MinimalBalancedBlock {
    type Target = BalancedBlock;

    fn deref(&self) -> &BalancedBlock {
        &self.0
    }
}

pub fn is_balanced(top: &[Letter], bottom: &[Letter], d: usize) -> bool {
    match (abelianize(top, d), abelianize(bottom, d)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

/// Balanced, nonempty, and no proper prefix pair is balanced.
pub fn is_minimal(top: &[Letter], bottom: &[Letter], d: usize) -> bool {
    if top.is_empty() || !is_balanced(top, bottom, d) {
        return false;
    }
    let mut diff = Diff::new(d);
    for k in 0..top.len() - 1 {
        diff.step(top[k], bottom[k]);
        if diff.is_zero() {
            return false;
        }
    }
    true
}

/// Running difference of two prefix abelianizations.
#[derive(Clone, Debug)]
struct Diff {
    counts: Vec<i64>,
    nonzero: usize,
}

impl Diff {
    fn new(d: usize) -> Self {
        Self {
            counts: vec![0; d],
            nonzero: 0,
        }
    }

    fn bump(&mut self, l: Letter, delta: i64) {
        let c = &mut self.counts[l as usize];
        let was = *c != 0;
        *c += delta;
        match (was, *c != 0) {
            (false, true) => self.nonzero += 1,
            (true, false) => self.nonzero -= 1,
            _ => {}
        }
    }

    fn step(&mut self, top: Letter, bottom: Letter) {
        if top != bottom {
            self.bump(top, 1);
            self.bump(bottom, -1);
        }
    }

    fn is_zero(&self) -> bool {
        self.nonzero == 0
    }
}

/// Cuts a balanced pair at every length where the prefixes balance. The
/// cut points are forced, so this is the unique decomposition into
/// minimal blocks.
pub fn decompose_minimal(b: &BalancedBlock, d: usize) -> Result<Vec<MinimalBalancedBlock>> {
    let mut cuts = Vec::new();
    minimal_cut_points(&b.top, &b.bottom, d, &mut cuts)?;
    let mut start = 0;
    Ok(cuts
        .into_iter()
        .map(|end| {
            let piece = MinimalBalancedBlock(BalancedBlock {
                top: Word::from(&b.top[start..end]),
                bottom: Word::from(&b.bottom[start..end]),
            });
            start = end;
            piece
        })
        .collect())
}

/// End positions of the minimal blocks of a balanced pair, written into
/// `cuts` (cleared first).
pub fn minimal_cut_points(top: &[Letter], bottom: &[Letter], d: usize, cuts: &mut Vec<usize>) -> Result<()> {
    cuts.clear();
    let in_range = |w: &[Letter]| w.iter().all(|&l| (l as usize) < d);
    if top.len() != bottom.len() || !in_range(top) || !in_range(bottom) {
        return Err(Error::validation("cannot decompose an unbalanced pair"));
    }
    let balanced = if d <= 8 && top.len() < 128 {
        // One biased byte per letter; counts stay within ±127 so bytes never
        // carry into each other.
        const ZERO: u64 = 0x8080_8080_8080_8080;
        let mut key = ZERO;
        for (k, (&t, &b)) in top.iter().zip(bottom).enumerate() {
            key = key.wrapping_add(1 << (8 * t)).wrapping_sub(1 << (8 * b));
            if key == ZERO {
                cuts.push(k + 1);
            }
        }
        key == ZERO
    } else {
        let mut diff = Diff::new(d);
        for (k, (&t, &b)) in top.iter().zip(bottom).enumerate() {
            diff.step(t, b);
            if diff.is_zero() {
                cuts.push(k + 1);
            }
        }
        diff.is_zero()
    };
    if !balanced {
        cuts.clear();
        return Err(Error::validation("cannot decompose an unbalanced pair"));
    }
    Ok(())
}

/// Shortest nonempty balanced prefix pair of the two streams, if one
/// exists within `cap` letters.
pub fn seed_balanced_prefix(
    u: &mut FixedPointStream,
    v: &mut FixedPointStream,
    cap: usize,
) -> Option<MinimalBalancedBlock> {
    let d = u.alphabet().len();
    let (pu, pv) = (u.prefix(cap), v.prefix(cap));
    let mut diff = Diff::new(d);
    for k in 0..cap {
        diff.step(pu[k], pv[k]);
        if diff.is_zero() {
            return Some(MinimalBalancedBlock(BalancedBlock {
                top: Word::from(&pu[..=k]),
                bottom: Word::from(&pv[..=k]),
            }));
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Longest prefix scanned for the first balanced block.
    pub seed: usize,
    /// Longest minimal block accepted.
    pub block_len: usize,
    /// Largest block alphabet accepted.
    pub block_count: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            seed: 10_000,
            block_len: 1_000,
            block_count: 10_000,
        }
    }
}

/// Block names in discovery order: `A`..`Z`, then `B26`, `B27`, ...
pub fn block_name(index: usize) -> String {
    if index < 26 {
        char::from(b'A' + index as u8).to_string()
    } else {
        format!("B{index}")
    }
}

fn parse_block_names(text: &str) -> Option<Vec<String>> {
    let mut names = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if !c.is_ascii_uppercase() {
            return None;
        }
        let mut name = c.to_string();
        while let Some(&digit) = chars.peek().filter(|d| d.is_ascii_digit()) {
            name.push(digit);
            chars.next();
        }
        names.push(name);
    }
    Some(names)
}

/// Substitution `φ` on an alphabet of minimal balanced blocks together
/// with the projection `π` sending each block to its pair of words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMorphism {
    alphabet: Alphabet,
    blocks: Vec<BalancedBlock>,
    phi: Vec<Vec<u32>>,
    index: HashMap<BalancedBlock, u32>,
}

impl BlockMorphism {
    /// Checks closure: every block used in an image is a block.
    pub fn new(alphabet: Alphabet, blocks: Vec<BalancedBlock>, phi: Vec<Vec<u32>>) -> Result<Self> {
        if blocks.len() != phi.len() {
            return Err(Error::validation("one image per block is required"));
        }
        let d = alphabet.len();
        let mut index = HashMap::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            if !b.is_minimal(d) {
                return Err(Error::validation(format!(
                    "block {} is not minimal balanced",
                    block_name(i)
                )));
            }
            if index.insert(b.clone(), i as u32).is_some() {
                return Err(Error::validation(format!(
                    "block {} is a duplicate",
                    block_name(i)
                )));
            }
        }
        if phi.iter().flatten().any(|&x| x as usize >= blocks.len()) {
            return Err(Error::validation("image refers to an unknown block"));
        }
        Ok(Self {
            alphabet,
            blocks,
            phi,
            index,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[BalancedBlock] {
        &self.blocks
    }

    pub fn block(&self, x: u32) -> &BalancedBlock {
        &self.blocks[x as usize]
    }

    pub fn image(&self, x: u32) -> &[u32] {
        &self.phi[x as usize]
    }

    pub fn index_of(&self, block: &BalancedBlock) -> Option<u32> {
        self.index.get(block).copied()
    }

    pub fn name(&self, x: u32) -> String {
        block_name(x as usize)
    }

    pub fn names(&self) -> Vec<String> {
        (0..self.len()).map(block_name).collect()
    }

    pub fn spell(&self, w: &[u32]) -> String {
        w.iter().map(|&x| block_name(x as usize)).collect()
    }

    pub fn max_block_len(&self) -> usize {
        self.blocks.iter().map(BalancedBlock::len).max().unwrap_or(0)
    }

    pub fn apply(&self, w: &[u32]) -> Result<Vec<u32>> {
        let mut out = Vec::new();
        for &x in w {
            out.extend_from_slice(
                self.phi
                    .get(x as usize)
                    .ok_or_else(|| Error::validation(format!("unknown block index {x}")))?,
            );
        }
        Ok(out)
    }

    pub fn iterate(&self, w: &[u32], n: u32) -> Result<Vec<u32>> {
        let mut cur = w.to_vec();
        for _ in 0..n {
            cur = self.apply(&cur)?;
        }
        Ok(cur)
    }

    /// `π` extended to words: concatenated tops over concatenated bottoms.
    pub fn flatten(&self, w: &[u32]) -> Result<BalancedBlock> {
        let mut out = BalancedBlock::empty();
        for &x in w {
            let b = self
                .blocks
                .get(x as usize)
                .ok_or_else(|| Error::validation(format!("unknown block index {x}")))?;
            out.top.extend_from_slice(&b.top);
            out.bottom.extend_from_slice(&b.bottom);
        }
        Ok(out)
    }

    /// `M_φ[i][j]` = occurrences of block `i` in `φ(j)`.
    pub fn incidence_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.len();
        let mut m = vec![vec![0u64; n]; n];
        for (j, img) in self.phi.iter().enumerate() {
            for &i in img {
                m[i as usize][j] += 1;
            }
        }
        m
    }

    /// Text form: `block <Name> = <top> | <bottom>` lines in discovery
    /// order, then `phi <Name> -> <Name><Name>…` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, b) in self.blocks.iter().enumerate() {
            let (t, bt) = b.spell(&self.alphabet);
            out.push_str(&format!("block {} = {t} | {bt}\n", block_name(i)));
        }
        for (i, img) in self.phi.iter().enumerate() {
            out.push_str(&format!("phi {} -> {}\n", block_name(i), self.spell(img)));
        }
        out
    }

    pub fn parse_text(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let mut blocks: Vec<BalancedBlock> = Vec::new();
        let mut images: Vec<Option<Vec<String>>> = Vec::new();
        let d = alphabet.len();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("block ") {
                let (name, pair) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::parse(line_no, "expected `block <Name> = <top> | <bottom>`"))?;
                if name.trim() != block_name(blocks.len()) {
                    return Err(Error::parse(
                        line_no,
                        format!(
                            "expected block {}, found {}",
                            block_name(blocks.len()),
                            name.trim()
                        ),
                    ));
                }
                let (top, bottom) = pair
                    .split_once('|')
                    .ok_or_else(|| Error::parse(line_no, "missing `|` between top and bottom"))?;
                let top = alphabet
                    .word(top.trim())
                    .map_err(|e| Error::parse(line_no, e.to_string()))?;
                let bottom = alphabet
                    .word(bottom.trim())
                    .map_err(|e| Error::parse(line_no, e.to_string()))?;
                let block =
                    BalancedBlock::new(top, bottom, d).map_err(|e| Error::parse(line_no, e.to_string()))?;
                blocks.push(block);
                images.push(None);
            } else if let Some(rest) = line.strip_prefix("phi ") {
                let (name, image) = rest
                    .split_once("->")
                    .ok_or_else(|| Error::parse(line_no, "expected `phi <Name> -> <Names>`"))?;
                let idx = (0..blocks.len())
                    .find(|&i| block_name(i) == name.trim())
                    .ok_or_else(|| Error::parse(line_no, format!("unknown block {}", name.trim())))?;
                let names = parse_block_names(image.trim())
                    .ok_or_else(|| Error::parse(line_no, "malformed block word"))?;
                if images[idx].replace(names).is_some() {
                    return Err(Error::parse(line_no, "duplicate phi rule"));
                }
            } else {
                return Err(Error::parse(line_no, "expected a `block` or `phi` line"));
            }
        }
        let lookup: HashMap<String, u32> = (0..blocks.len()).map(|i| (block_name(i), i as u32)).collect();
        let phi = images
            .into_iter()
            .enumerate()
            .map(|(i, img)| {
                let img =
                    img.ok_or_else(|| Error::validation(format!("no phi rule for {}", block_name(i))))?;
                img.iter()
                    .map(|n| {
                        lookup
                            .get(n)
                            .copied()
                            .ok_or_else(|| Error::validation(format!("unknown block {n}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet.clone(), blocks, phi)
    }
}

impl fmt::Display for BlockMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntersectionStatus {
    Success,
    EmptyIntersectionSuspected,
    CapExceeded,
}

#[derive(Clone, Debug)]
pub struct IntersectionReport {
    pub status: IntersectionStatus,
    pub morphism: Option<BlockMorphism>,
    pub caps: Caps,
    /// Both substitutions were raised to this power so that their periodic
    /// points become fixed points.
    pub power: u32,
    pub seeds: (Letter, Letter),
    pub block_count: usize,
    pub max_block_len: usize,
    pub message: String,
}

/// Periodic points of both substitutions, as fixed points of a common power.
pub fn common_fixed_points(
    s1: &Substitution,
    s2: &Substitution,
) -> Result<(FixedPointStream, FixedPointStream)> {
    let (k1, a1) = s1.periodic_seed(s1.default_periodic_cap())?;
    let (k2, a2) = s2.periodic_seed(s2.default_periodic_cap())?;
    let power = lcm(k1, k2);
    Ok((
        FixedPointStream::from_generator(s1.power(power), power, a1)?,
        FixedPointStream::from_generator(s2.power(power), power, a2)?,
    ))
}

fn lcm(a: u32, b: u32) -> u32 {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Puts both substitutions on the first one's alphabet and checks that
/// they share an irreducible unimodular Pisot incidence matrix.
pub fn validate_pair(s1: &Substitution, s2: &Substitution) -> Result<(Substitution, Substitution)> {
    let s2 = s2.relabel_to(s1.alphabet())?;
    if s1.incidence_matrix() != s2.incidence_matrix() {
        return Err(Error::validation(format!(
            "incidence matrices differ: {} vs {}",
            s1.incidence_matrix(),
            s2.incidence_matrix()
        )));
    }
    classify(&s1.incidence_matrix()).require_irreducible_unimodular_pisot()?;
    Ok((s1.clone(), s2))
}

const INNER_POINT_HYPOTHESIS: &str =
    "termination presumes that 0 is an inner point of the Rauzy fractal of the first substitution";

/// Worklist closure from the first balanced block; blocks are named in
/// discovery order, images scanned left to right.
pub fn intersection_morphism(s1: &Substitution, s2: &Substitution, caps: Caps) -> Result<IntersectionReport> {
    let (s1, s2) = validate_pair(s1, s2)?;
    let d = s1.dim();
    let (mut u, mut v) = common_fixed_points(&s1, &s2)?;
    let power = u.power();
    let seeds = (u.seed(), v.seed());
    let mut report = IntersectionReport {
        status: IntersectionStatus::EmptyIntersectionSuspected,
        morphism: None,
        caps,
        power,
        seeds,
        block_count: 0,
        max_block_len: 0,
        message: String::new(),
    };

    let Some(seed) = seed_balanced_prefix(&mut u, &mut v, caps.seed) else {
        report.message = format!(
            "no balanced prefix pair within {} letters; the fixed points share no stepped-line vertex besides the origin so far",
            caps.seed
        );
        return Ok(report);
    };

    let (g1, g2) = (u.generator().clone(), v.generator().clone());
    let mut blocks = vec![seed.into_block()];
    let mut index: HashMap<BalancedBlock, u32> = HashMap::new();
    index.insert(blocks[0].clone(), 0);
    let mut phi: Vec<Vec<u32>> = Vec::new();
    let mut max_len = blocks[0].len();

    let mut cursor = 0;
    while cursor < blocks.len() {
        let image = BalancedBlock {
            top: g1.apply(&blocks[cursor].top)?,
            bottom: g2.apply(&blocks[cursor].bottom)?,
        };
        let mut word = Vec::new();
        for piece in decompose_minimal(&image, d)? {
            let piece = piece.into_block();
            let id = match index.get(&piece) {
                Some(&id) => id,
                None => {
                    if piece.len() > caps.block_len || blocks.len() >= caps.block_count {
                        report.status = IntersectionStatus::CapExceeded;
                        report.block_count = blocks.len();
                        report.max_block_len = max_len.max(piece.len());
                        report.message = format!(
                            "cap exceeded after {} blocks (block length {} vs cap {}, block count cap {}); {INNER_POINT_HYPOTHESIS}",
                            blocks.len(),
                            piece.len(),
                            caps.block_len,
                            caps.block_count
                        );
                        return Ok(report);
                    }
                    let id = blocks.len() as u32;
                    max_len = max_len.max(piece.len());
                    index.insert(piece.clone(), id);
                    blocks.push(piece);
                    id
                }
            };
            word.push(id);
        }
        phi.push(word);
        cursor += 1;
    }

    let morphism = BlockMorphism::new(s1.alphabet().clone(), blocks, phi)?;
    report.status = IntersectionStatus::Success;
    report.block_count = morphism.len();
    report.max_block_len = max_len;
    report.message = format!("{} blocks, longest has length {max_len}", morphism.len());
    report.morphism = Some(morphism);
    Ok(report)
}

/// Lengths `k < n` at which the prefixes of both fixed points have equal
/// abelianizations; always starts with 0.
pub fn balanced_positions(u: &mut FixedPointStream, v: &mut FixedPointStream, n: usize) -> Vec<usize> {
    let d = u.alphabet().len();
    let (pu, pv) = (u.prefix(n), v.prefix(n));
    let mut diff = Diff::new(d);
    let mut out = Vec::new();
    for k in 0..n {
        if diff.is_zero() {
            out.push(k);
        }
        diff.step(pu[k], pv[k]);
    }
    out
}

/// Projected common vertices of the two stepped lines among the first `n`
/// prefix lengths. Each point is labeled by the block of the fixed-point
/// decomposition that starts there; without a morphism every point gets
/// a single label.
pub fn common_points(
    s1: &Substitution,
    s2: &Substitution,
    n: usize,
    pd: &PerronData,
    morphism: Option<&BlockMorphism>,
) -> Result<PointCloud> {
    let (s1, s2) = validate_pair(s1, s2)?;
    let d = s1.dim();
    if pd.dim() != d {
        return Err(Error::validation(
            "Perron data dimension does not match the alphabet",
        ));
    }
    let (mut u, mut v) = common_fixed_points(&s1, &s2)?;
    let names = match morphism {
        Some(m) => m.names(),
        None => vec!["0".into()],
    };
    let mut cloud = PointCloud::new(pd.stable_dim(), names, "common vertices of two stepped lines");
    cloud.prefix_count = n;
    if n == 0 {
        return Ok(cloud);
    }
    let positions = balanced_positions(&mut u, &mut v, n);
    let lookahead = morphism.map_or(0, BlockMorphism::max_block_len);

    let mut counts = vec![0i64; d];
    let mut point = vec![0.0; pd.stable_dim()];
    let mut last = 0;
    for (i, &k) in positions.iter().enumerate() {
        {
            let pu = u.prefix(k);
            for &l in &pu[last..k] {
                counts[l as usize] += 1;
            }
        }
        last = k;
        pd.project_counts_into(&counts, &mut point);
        let label = match morphism {
            None => 0,
            Some(m) => {
                let end = match positions.get(i + 1) {
                    Some(&e) => e,
                    None => next_balanced(&mut u, &mut v, k, k + lookahead)?,
                };
                let block = BalancedBlock {
                    top: Word::from(&u.prefix(end)[k..end]),
                    bottom: Word::from(&v.prefix(end)[k..end]),
                };
                m.index_of(&block).ok_or_else(|| {
                    Error::validation(format!("block at position {k} is not in the morphism alphabet"))
                })?
            }
        };
        cloud.push(&point, label)?;
    }
    Ok(cloud)
}

fn next_balanced(
    u: &mut FixedPointStream,
    v: &mut FixedPointStream,
    start: usize,
    limit: usize,
) -> Result<usize> {
    let d = u.alphabet().len();
    let (pu, pv) = (u.prefix(limit).to_vec(), v.prefix(limit));
    let mut diff = Diff::new(d);
    for k in start..limit {
        diff.step(pu[k], pv[k]);
        if diff.is_zero() {
            return Ok(k + 1);
        }
    }
    Err(Error::validation(format!(
        "no block of the morphism starts at position {start}"
    )))
}

/// Positions `k < n` where both fixed points carry `letter`.
pub fn aligned_letter_check(
    s1: &Substitution,
    s2: &Substitution,
    letter: Letter,
    n: usize,
) -> Result<Vec<usize>> {
    let (s1, s2) = (s1.clone(), s2.relabel_to(s1.alphabet())?);
    if letter as usize >= s1.dim() {
        return Err(Error::validation("letter outside the common alphabet"));
    }
    let mut u = s1.periodic_point(s1.default_periodic_cap())?;
    let mut v = s2.periodic_point(s2.default_periodic_cap())?;
    let (pu, pv) = (u.prefix(n), v.prefix(n));
    Ok((0..n).filter(|&k| pu[k] == letter && pv[k] == letter).collect())
}
