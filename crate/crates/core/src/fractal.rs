//! Stepped lines, projected point clouds and the graph-directed IFS that
//! the subtiles satisfy.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::spectral::{classify, stable_action, PerronData, StableMatrix};
use crate::word::{AbelianVector, FixedPointStream, Letter, Substitution, Word};

pub const DEFAULT_POINTS: usize = 100_000;

/// Largest cloud `gifs_cloud` will materialize.
pub const GIFS_POINT_LIMIT: usize = 10_000_000;

/// Grid used to merge coincident GIFS points.
pub const GIFS_DEDUP_GRID: f64 = 1e-9;

/// Canonical stepped line of a word: `vertices[k]` is the abelianization
/// of the length-`k` prefix, `letters[k]` the letter that follows it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteppedLine {
    pub vertices: Vec<AbelianVector>,
    pub letters: Vec<Letter>,
}

impl SteppedLine {
    pub fn from_word(w: &[Letter], d: usize) -> Result<Self> {
        let mut vertices = Vec::with_capacity(w.len() + 1);
        let mut v = AbelianVector::zero(d);
        vertices.push(v.clone());
        for &l in w {
            if l as usize >= d {
                return Err(Error::validation("letter outside alphabet"));
            }
            v.bump(l);
            vertices.push(v.clone());
        }
        let line = Self {
            vertices,
            letters: w.to_vec(),
        };
        line.check_canonical()?;
        Ok(line)
    }

    /// Starts at the origin and every step is the unit vector of its letter.
    pub fn check_canonical(&self) -> Result<()> {
        let first = self
            .vertices
            .first()
            .ok_or_else(|| Error::validation("stepped line has no vertices"))?;
        if !first.is_zero() {
            return Err(Error::validation("stepped line does not start at the origin"));
        }
        if self.vertices.len() != self.letters.len() + 1 {
            return Err(Error::validation("stepped line vertex/letter count mismatch"));
        }
        for (k, pair) in self.vertices.windows(2).enumerate() {
            let step = &pair[1] - &pair[0];
            if step != AbelianVector::unit(first.dim(), self.letters[k]) {
                return Err(Error::validation(format!("step {k} is not a unit vector")));
            }
        }
        Ok(())
    }
}

pub fn stepped_line(stream: &mut FixedPointStream, n: usize) -> Result<SteppedLine> {
    let d = stream.alphabet().len();
    SteppedLine::from_word(stream.prefix(n), d)
}

/// Finite labeled point set in stable coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    labels: Vec<u32>,
    label_names: Vec<String>,
    pub source: String,
    pub prefix_count: usize,
}

impl PointCloud {
    pub fn new(dim: usize, label_names: Vec<String>, source: impl Into<String>) -> Self {
        Self {
            dim,
            coords: Vec::new(),
            labels: Vec::new(),
            label_names,
            source: source.into(),
            prefix_count: 0,
        }
    }

    pub fn push(&mut self, point: &[f64], label: u32) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::validation("point dimension mismatch"));
        }
        if label as usize >= self.label_names.len() {
            return Err(Error::validation(format!("label {label} out of range")));
        }
        if point.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite point coordinate".into()));
        }
        self.coords.extend_from_slice(point);
        self.labels.push(label);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn label_count(&self) -> usize {
        self.label_names.len()
    }

    pub fn points(&self) -> impl Iterator<Item = (&[f64], u32)> {
        (0..self.len()).map(move |i| (self.point(i), self.labels[i]))
    }

    /// Same points, all under one label.
    pub fn unlabeled(&self) -> PointCloud {
        PointCloud {
            dim: self.dim,
            coords: self.coords.clone(),
            labels: vec![0; self.labels.len()],
            label_names: vec!["*".into()],
            source: self.source.clone(),
            prefix_count: self.prefix_count,
        }
    }

    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.label_count()];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.len())
            .map(|i| self.point(i).iter().map(|x| x * x).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt()
    }

    /// Per-axis `(min, max)`; `None` for an empty cloud.
    pub fn bounds(&self) -> Option<Vec<(f64, f64)>> {
        if self.is_empty() {
            return None;
        }
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for (p, _) in self.points() {
            for (bi, &x) in b.iter_mut().zip(p) {
                bi.0 = bi.0.min(x);
                bi.1 = bi.1.max(x);
            }
        }
        Some(b)
    }

    /// Largest distance between two points. Exact in one and two
    /// dimensions (via the convex hull); the bounding-box diagonal, an
    /// upper bound, in higher dimensions.
    pub fn diameter(&self) -> f64 {
        let Some(bounds) = self.bounds() else {
            return 0.0;
        };
        match self.dim {
            0 => 0.0,
            1 => bounds[0].1 - bounds[0].0,
            2 => {
                let hull = convex_hull((0..self.len()).map(|i| (self.point(i)[0], self.point(i)[1])));
                let mut best = 0.0f64;
                for (i, a) in hull.iter().enumerate() {
                    for b in &hull[i + 1..] {
                        best = best.max((a.0 - b.0).hypot(a.1 - b.1));
                    }
                }
                best
            }
            _ => bounds
                .iter()
                .map(|(lo, hi)| (hi - lo).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

fn convex_hull(points: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross =
        |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Projects the first `n` vertices of the canonical stepped line of the
/// fixed point; vertex `k` is labeled by the letter `u_k` that follows it.
pub fn rauzy_cloud(sigma: &Substitution, n: usize, pd: &PerronData) -> Result<PointCloud> {
    classify(&sigma.incidence_matrix()).require_pisot_irreducible()?;
    if n == 0 {
        return Err(Error::validation("point count must be at least 1"));
    }
    let mut stream = sigma.periodic_point(sigma.default_periodic_cap())?;
    projected_prefix_cloud(&mut stream, n, pd)
}

pub fn projected_prefix_cloud(
    stream: &mut FixedPointStream,
    n: usize,
    pd: &PerronData,
) -> Result<PointCloud> {
    let alphabet = stream.alphabet().clone();
    let d = alphabet.len();
    if pd.dim() != d {
        return Err(Error::validation(
            "Perron data dimension does not match the alphabet",
        ));
    }
    let names = alphabet.symbols().iter().map(|c| c.to_string()).collect();
    let mut cloud = PointCloud::new(pd.stable_dim(), names, "projected stepped line");
    cloud.coords.reserve(n * pd.stable_dim());
    cloud.labels.reserve(n);
    let word = stream.prefix(n);
    let mut counts = vec![0i64; d];
    let mut point = vec![0.0; pd.stable_dim()];
    for &letter in word {
        pd.project_counts_into(&counts, &mut point);
        cloud.push(&point, letter as u32)?;
        counts[letter as usize] += 1;
    }
    cloud.prefix_count = n;
    Ok(cloud)
}

#[derive(Clone, Debug)]
pub struct GifsEdge {
    pub from: Letter,
    pub to: Letter,
    pub prefix: Word,
    pub translation: Vec<f64>,
}

/// Graph-directed IFS `X(i) = ⋃_{i→j} S·X(j) + π(l(p))`, one edge per
/// prefix-suffix automaton edge.
#[derive(Clone, Debug)]
pub struct GifsSystem {
    pub vertices: usize,
    pub edges: Vec<GifsEdge>,
    pub contraction: StableMatrix,
    pub label_names: Vec<String>,
}

pub fn gifs_system(sigma: &Substitution, pd: &PerronData) -> Result<GifsSystem> {
    let d = sigma.dim();
    let automaton = sigma.prefix_suffix_automaton();
    let edges: Vec<GifsEdge> = automaton
        .edges
        .iter()
        .map(|e| {
            let l = crate::word::abelianize(&e.prefix, d)?;
            Ok(GifsEdge {
                from: e.from(),
                to: e.to(),
                prefix: e.prefix.clone(),
                translation: pd.project(&l).0,
            })
        })
        .collect::<Result<_>>()?;
    for v in 0..d as Letter {
        if !edges.iter().any(|e| e.from == v) {
            return Err(Error::validation(format!(
                "vertex '{}' has no outgoing edge",
                sigma.alphabet().symbol(v)
            )));
        }
    }
    Ok(GifsSystem {
        vertices: d,
        edges,
        contraction: stable_action(pd, &sigma.incidence_matrix()),
        label_names: sigma.alphabet().symbols().iter().map(|c| c.to_string()).collect(),
    })
}

/// Per-vertex point sets of one GIFS iterate, flattened coordinates.
pub type GifsLevel = Vec<Vec<f64>>;

impl GifsSystem {
    pub fn stable_dim(&self) -> usize {
        self.contraction.dim()
    }

    pub fn initial_level(&self) -> GifsLevel {
        vec![vec![0.0; self.stable_dim()]; self.vertices]
    }

    /// One application of the GIFS equation, merging points that agree on
    /// the dedup grid.
    pub fn step(&self, level: &GifsLevel) -> Result<GifsLevel> {
        let dim = self.stable_dim();
        let mut total = 0usize;
        for e in &self.edges {
            total += level[e.to as usize].len() / dim.max(1);
            if total > GIFS_POINT_LIMIT {
                return Err(Error::Resource(format!(
                    "GIFS iterate would exceed {GIFS_POINT_LIMIT} points"
                )));
            }
        }
        let mut next: GifsLevel = vec![Vec::new(); self.vertices];
        for (i, out) in next.iter_mut().enumerate() {
            let mut seen: HashSet<Vec<i64>> = HashSet::new();
            for e in self.edges.iter().filter(|e| e.from as usize == i) {
                let src = &level[e.to as usize];
                let count = src.len().checked_div(dim).unwrap_or(1);
                for k in 0..count {
                    let p = &src[k * dim..(k + 1) * dim];
                    let mut q = self.contraction.apply(p);
                    q.iter_mut().zip(&e.translation).for_each(|(a, t)| *a += t);
                    let key: Vec<i64> = q.iter().map(|x| (x / GIFS_DEDUP_GRID).round() as i64).collect();
                    if seen.insert(key) {
                        out.extend_from_slice(&q);
                    }
                }
            }
        }
        Ok(next)
    }

    pub fn level(&self, depth: usize) -> Result<GifsLevel> {
        let raw: u128 = self
            .path_counts(depth)
            .iter()
            .fold(0, |a, &b| a.saturating_add(b));
        if raw > GIFS_POINT_LIMIT as u128 {
            return Err(Error::Resource(format!(
                "GIFS depth {depth} has {raw} points before merging, limit is {GIFS_POINT_LIMIT}"
            )));
        }
        let mut level = self.initial_level();
        for _ in 0..depth {
            level = self.step(&level)?;
        }
        Ok(level)
    }

    pub fn level_to_cloud(&self, level: &GifsLevel, depth: usize) -> Result<PointCloud> {
        let dim = self.stable_dim();
        let mut cloud = PointCloud::new(dim, self.label_names.clone(), format!("GIFS depth {depth}"));
        for (v, pts) in level.iter().enumerate() {
            if dim == 0 {
                cloud.push(&[], v as u32)?;
                continue;
            }
            for p in pts.chunks(dim) {
                cloud.push(p, v as u32)?;
            }
        }
        Ok(cloud)
    }

    /// Number of length-`depth` paths leaving each vertex, i.e. the size of
    /// each iterate before merging coincident points.
    pub fn path_counts(&self, depth: usize) -> Vec<u128> {
        let mut counts = vec![1u128; self.vertices];
        for _ in 0..depth {
            let mut next = vec![0u128; self.vertices];
            for e in &self.edges {
                next[e.from as usize] = next[e.from as usize].saturating_add(counts[e.to as usize]);
            }
            counts = next;
        }
        counts
    }
}

pub fn gifs_cloud(g: &GifsSystem, depth: usize) -> Result<PointCloud> {
    let level = g.level(depth)?;
    g.level_to_cloud(&level, depth)
}

/// Largest distance from a point of `from` to its nearest neighbour in `to`.
pub fn directed_distance(from: &PointCloud, to: &PointCloud) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    if to.is_empty() {
        return f64::INFINITY;
    }
    let index = GridIndex::new(to);
    (0..from.len())
        .map(|i| index.nearest(from.point(i)))
        .fold(0.0, f64::max)
}

/// Uniform bucket grid over the first two coordinates.
struct GridIndex<'a> {
    cloud: &'a PointCloud,
    origin: (f64, f64),
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
}

fn xy(p: &[f64]) -> (f64, f64) {
    (
        p.first().copied().unwrap_or(0.0),
        p.get(1).copied().unwrap_or(0.0),
    )
}

impl<'a> GridIndex<'a> {
    fn new(cloud: &'a PointCloud) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) =
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for i in 0..cloud.len() {
            let (x, y) = xy(cloud.point(i));
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        let extent = (x1 - x0).max(y1 - y0).max(1e-12);
        let per_side = (cloud.len() as f64).sqrt().ceil().max(1.0);
        let cell = extent / per_side;
        let cols = ((x1 - x0) / cell).floor() as usize + 1;
        let rows = ((y1 - y0) / cell).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); cols * rows];
        for i in 0..cloud.len() {
            let (x, y) = xy(cloud.point(i));
            let c = (((x - x0) / cell).floor() as usize).min(cols - 1);
            let r = (((y - y0) / cell).floor() as usize).min(rows - 1);
            buckets[r * cols + c].push(i as u32);
        }
        Self {
            cloud,
            origin: (x0, y0),
            cell,
            cols,
            rows,
            buckets,
        }
    }

    fn nearest(&self, p: &[f64]) -> f64 {
        let (x, y) = xy(p);
        let fc = ((x - self.origin.0) / self.cell).floor() as i64;
        let fr = ((y - self.origin.1) / self.cell).floor() as i64;
        let mut best = f64::INFINITY;
        let max_ring = self.cols.max(self.rows) as i64 + 1;
        for ring in 0..=max_ring + fc.abs().max(fr.abs()) {
            // Every point outside this ring is at least (ring − 1)·cell away.
            if best.is_finite() && (ring as f64 - 1.0) * self.cell > best {
                break;
            }
            for r in fr - ring..=fr + ring {
                for c in fc - ring..=fc + ring {
                    if (r - fr).abs() != ring && (c - fc).abs() != ring {
                        continue;
                    }
                    if r < 0 || c < 0 || r >= self.rows as i64 || c >= self.cols as i64 {
                        continue;
                    }
                    for &i in &self.buckets[r as usize * self.cols + c as usize] {
                        let q = self.cloud.point(i as usize);
                        let dist = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                        best = best.min(dist);
                    }
                }
            }
        }
        best
    }
}
