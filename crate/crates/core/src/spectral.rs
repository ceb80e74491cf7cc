//! Characteristic polynomials, Pisot classification, Perron–Frobenius data
//! and the projection onto the contracting hyperplane.
//!
//! Everything downstream that needs exactness (balanced blocks, prefix
//! matching) works on integer vectors; the floating point data here is only
//! used to place points in the plane.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::word::{AbelianVector, IncidenceMatrix};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Margin by which non-dominant roots must stay inside the unit disc.
pub const PISOT_MARGIN: f64 = 1e-6;

const POWER_ITERATION_LIMIT: usize = 100_000;

/// Integer coefficients `c₀..c_d` of `det(X·I − M)`, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly {
    coeffs: Vec<i64>,
}

impl CharPoly {
    pub fn from_coeffs(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.last() != Some(&1) {
            return Err(Error::validation("characteristic polynomial must be monic"));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * x + (i as f64) * c as f64)
    }

    fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c as f64)
    }

    fn eval_derivative_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (i, &c)| {
                acc * z + (i as f64) * c as f64
            })
    }

    /// Cauchy bound: every root has modulus at most this.
    pub fn root_bound(&self) -> f64 {
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .map(|c| c.unsigned_abs() as f64)
            .fold(0.0, f64::max)
    }

    /// All complex roots (Durand–Kerner, then a Newton polish per root).
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let r = self.root_bound();
        let seed = Complex64::new(0.4, 0.9);
        let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * (r / 2.0)).collect();
        for _ in 0..5000 {
            let mut change = 0.0f64;
            for i in 0..n {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= z[i] - z[j];
                    }
                }
                if denom.norm() == 0.0 {
                    denom = Complex64::new(1e-300, 0.0);
                }
                let delta = self.eval_complex(z[i]) / denom;
                z[i] -= delta;
                change = change.max(delta.norm());
            }
            if change < 1e-15 * r {
                break;
            }
        }
        for zi in &mut z {
            for _ in 0..8 {
                let dp = self.eval_derivative_complex(*zi);
                if dp.norm() < 1e-300 {
                    break;
                }
                let step = self.eval_complex(*zi) / dp;
                if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 1e-3 {
                    break;
                }
                *zi -= step;
            }
        }
        z.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
        z
    }

    /// Exact quotient by a monic integer polynomial, if it divides.
    pub fn divide_exact(&self, divisor: &[i64]) -> Option<Vec<i64>> {
        let dn = divisor.len() - 1;
        if divisor.last() != Some(&1) || dn > self.degree() {
            return None;
        }
        let mut rem: Vec<i128> = self.coeffs.iter().map(|&c| c as i128).collect();
        let mut quot = vec![0i128; self.degree() - dn + 1];
        for i in (0..quot.len()).rev() {
            let q = rem[i + dn];
            quot[i] = q;
            for (j, &dc) in divisor.iter().enumerate() {
                rem[i + j] -= q * dc as i128;
            }
        }
        if rem[..dn].iter().any(|&r| r != 0) {
            return None;
        }
        quot.into_iter().map(|q| i64::try_from(q).ok()).collect()
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.unsigned_abs();
            match (i, a) {
                (0, _) => write!(f, "{a}")?,
                (_, 1) => {}
                _ => write!(f, "{a}")?,
            }
            match i {
                0 => {}
                1 => write!(f, "X")?,
                _ => write!(f, "X^{i}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Faddeev–LeVerrier recursion in exact integer arithmetic.
pub fn char_poly(m: &IncidenceMatrix) -> CharPoly {
    let d = m.dim();
    let a: Vec<Vec<i128>> = m
        .rows()
        .into_iter()
        .map(|r| r.into_iter().map(i128::from).collect())
        .collect();
    let mut coeffs = vec![0i128; d + 1];
    coeffs[d] = 1;
    // aux holds M_k; M_0 = 0.
    let mut aux = vec![vec![0i128; d]; d];
    for k in 1..=d {
        // M_k = A·M_{k−1} + c_{d−k+1}·I
        let mut next = vec![vec![0i128; d]; d];
        for i in 0..d {
            for j in 0..d {
                next[i][j] = (0..d).map(|l| a[i][l] * aux[l][j]).sum();
            }
            next[i][i] += coeffs[d - k + 1];
        }
        aux = next;
        let trace: i128 = (0..d)
            .map(|i| (0..d).map(|l| a[i][l] * aux[l][i]).sum::<i128>())
            .sum();
        coeffs[d - k] = -trace / k as i128;
    }
    CharPoly {
        coeffs: coeffs.into_iter().map(|c| c as i64).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub irreducible: bool,
    /// False when irreducibility rests on numerical evidence only.
    pub irreducibility_exact: bool,
    pub unimodular: bool,
    pub pisot: bool,
    pub determinant: i128,
    pub reasons: Vec<String>,
}

impl Classification {
    pub fn is_irreducible_unimodular_pisot(&self) -> bool {
        self.irreducible && self.unimodular && self.pisot
    }

    pub fn require_pisot_irreducible(&self) -> Result<()> {
        if self.irreducible && self.pisot {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "substitution is not irreducible Pisot: {}",
                self.reasons.join("; ")
            )))
        }
    }

    pub fn require_irreducible_unimodular_pisot(&self) -> Result<()> {
        if self.is_irreducible_unimodular_pisot() {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "substitution is not irreducible unimodular Pisot: {}",
                self.reasons.join("; ")
            )))
        }
    }
}

pub fn classify(m: &IncidenceMatrix) -> Classification {
    let poly = char_poly(m);
    let mut reasons = Vec::new();

    let determinant = m.determinant();
    let unimodular = determinant.abs() == 1;
    if !unimodular {
        reasons.push(format!("determinant is {determinant}, not ±1"));
    }

    let roots = poly.roots();
    let (irreducible, irreducibility_exact) = match find_factor(&poly, &roots) {
        Some(factor) => {
            reasons.push(format!(
                "characteristic polynomial {poly} has the factor {}",
                CharPoly { coeffs: factor }
            ));
            (false, true)
        }
        None if poly.degree() <= 5 => (true, true),
        None => {
            reasons.push(format!(
                "irreducibility of degree-{} polynomial checked numerically only (heuristic)",
                poly.degree()
            ));
            (true, false)
        }
    };

    let pisot = match roots.first() {
        None => false,
        Some(dominant) => {
            let scale = dominant.norm().max(1.0);
            let real = dominant.im.abs() <= 1e-9 * scale;
            let expanding = dominant.re > 1.0 + PISOT_MARGIN;
            let others_inside = roots[1..].iter().all(|z| z.norm() < 1.0 - PISOT_MARGIN);
            if !real {
                reasons.push("dominant root is not real".into());
            }
            if !expanding {
                reasons.push(format!("dominant root {:.10} is not > 1", dominant.re));
            }
            if !others_inside {
                let worst = roots[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
                reasons.push(format!(
                    "a non-dominant root has modulus {worst:.10} (must be < 1)"
                ));
            }
            real && expanding && others_inside
        }
    };

    Classification {
        irreducible,
        irreducibility_exact,
        unimodular,
        pisot,
        determinant,
        reasons,
    }
}

/// Searches for a proper monic integer factor. Factors of degree one and
/// two are enumerated exactly, which settles every degree up to five; for
/// higher degrees, candidate factors are assembled from numeric root
/// subsets and confirmed by exact division.
fn find_factor(poly: &CharPoly, roots: &[Complex64]) -> Option<Vec<i64>> {
    let n = poly.degree();
    if n < 2 {
        return None;
    }
    let c0 = poly.coeffs[0];
    if c0 == 0 {
        return Some(vec![0, 1]);
    }
    let divisors = divisors(c0.unsigned_abs());
    for &q in &divisors {
        for r in [q as i64, -(q as i64)] {
            if poly.divide_exact(&[-r, 1]).is_some() {
                return Some(vec![-r, 1]);
            }
        }
    }
    if n < 4 {
        return None;
    }
    let bound = poly.root_bound();
    let pmax = (2.0 * bound).ceil() as i64;
    for &q in &divisors {
        if q as f64 > bound * bound + 1.0 {
            continue;
        }
        for q in [q as i64, -(q as i64)] {
            for p in -pmax..=pmax {
                if poly.divide_exact(&[q, p, 1]).is_some() {
                    return Some(vec![q, p, 1]);
                }
            }
        }
    }
    if n <= 5 || n > 16 {
        return None;
    }
    for size in 3..=n / 2 {
        for subset in combinations(n, size) {
            let mut prod = vec![Complex64::new(1.0, 0.0)];
            for &i in &subset {
                let mut next = vec![Complex64::new(0.0, 0.0); prod.len() + 1];
                for (k, &c) in prod.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= c * roots[i];
                }
                prod = next;
            }
            let close = prod
                .iter()
                .all(|c| c.im.abs() < 1e-6 && (c.re - c.re.round()).abs() < 1e-6);
            if !close {
                continue;
            }
            let candidate: Vec<i64> = prod.iter().map(|c| c.re.round() as i64).collect();
            if poly.divide_exact(&candidate).is_some() {
                return Some(candidate);
            }
        }
    }
    None
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..)
        .take_while(|i| i * i <= n)
        .filter(|i| n.is_multiple_of(*i))
        .flat_map(|i| [i, n / i])
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// Dominant eigendata and an orthonormal basis of the contracting
/// hyperplane `{x : ⟨v_L, x⟩ = 0}`.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub beta: f64,
    /// Right eigenvector, entries summing to one.
    pub right: Vec<f64>,
    /// Left eigenvector, scaled so that `⟨left, right⟩ = 1`.
    pub left: Vec<f64>,
    /// `d − 1` orthonormal vectors spanning the stable hyperplane.
    pub basis: Vec<Vec<f64>>,
    pub tol: f64,
    /// Coordinates of the projection of each standard basis vector.
    unit_images: Vec<Vec<f64>>,
}

/// Point of the contracting hyperplane, in `PerronData::basis` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct StablePoint(pub Vec<f64>);

impl StablePoint {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

pub fn perron_data(m: &IncidenceMatrix, tol: f64) -> Result<PerronData> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::validation("tolerance must be positive"));
    }
    if !m.is_primitive(m.wielandt_bound()) {
        return Err(Error::validation("incidence matrix is not primitive"));
    }
    let d = m.dim();
    let mf: Vec<Vec<f64>> = m
        .rows()
        .into_iter()
        .map(|r| r.into_iter().map(|x| x as f64).collect())
        .collect();
    if d == 1 {
        return Ok(PerronData {
            beta: mf[0][0],
            right: vec![1.0],
            left: vec![1.0],
            basis: Vec::new(),
            tol,
            unit_images: vec![Vec::new()],
        });
    }

    let mut beta = power_iteration(&mf, tol)?;
    let poly = char_poly(m);
    for _ in 0..100 {
        let step = poly.eval(beta) / poly.eval_derivative(beta);
        if !step.is_finite() {
            break;
        }
        beta -= step;
        if step.abs() <= f64::EPSILON * beta.abs() {
            break;
        }
    }
    if poly.eval(beta).abs() >= tol * (1.0 + beta.powi(d as i32)) {
        return Err(Error::Numeric(format!(
            "Newton polish did not reach residual {tol:e} at beta = {beta}"
        )));
    }

    let mt: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| mf[j][i]).collect()).collect();
    let mut right = inverse_iteration(&mf, beta)?;
    let mut left = inverse_iteration(&mt, beta)?;
    let s: f64 = right.iter().sum();
    right.iter_mut().for_each(|x| *x /= s);
    let dot: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    left.iter_mut().for_each(|x| *x /= dot);
    if right.iter().any(|&x| x <= 0.0) || left.iter().any(|&x| x <= 0.0) {
        return Err(Error::Numeric("dominant eigenvector is not positive".into()));
    }

    let scale = 1.0 + mf.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    let residual_r = (0..d)
        .map(|i| ((0..d).map(|j| mf[i][j] * right[j]).sum::<f64>() - beta * right[i]).abs())
        .fold(0.0, f64::max);
    let residual_l = (0..d)
        .map(|j| ((0..d).map(|i| left[i] * mf[i][j]).sum::<f64>() - beta * left[j]).abs())
        .fold(0.0, f64::max);
    let lnorm = left.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if residual_r > tol * scale || residual_l > tol * scale * lnorm {
        return Err(Error::Numeric(format!(
            "eigenvector residuals {residual_r:e}, {residual_l:e} exceed tolerance"
        )));
    }

    // Gram–Schmidt on the projections of e₀..e_{d−2} along the expanding direction.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for (i, &li) in left.iter().enumerate().take(d - 1) {
        let mut y: Vec<f64> = (0..d)
            .map(|k| if k == i { 1.0 } else { 0.0 } - li * right[k])
            .collect();
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = y.iter().zip(b).map(|(a, b)| a * b).sum();
                y.iter_mut().zip(b).for_each(|(a, b)| *a -= c * b);
            }
        }
        let n = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-12 {
            return Err(Error::Numeric("degenerate stable basis".into()));
        }
        y.iter_mut().for_each(|x| *x /= n);
        basis.push(y);
    }

    let mut pd = PerronData {
        beta,
        right,
        left,
        basis,
        tol,
        unit_images: Vec::new(),
    };
    pd.unit_images = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            pd.project_real(&e).0
        })
        .collect();
    Ok(pd)
}

fn power_iteration(m: &[Vec<f64>], tol: f64) -> Result<f64> {
    let d = m.len();
    let mut x = vec![1.0 / d as f64; d];
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATION_LIMIT {
        let y: Vec<f64> = m
            .iter()
            .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect();
        // x sums to one, so the sum of y estimates the eigenvalue.
        let s: f64 = y.iter().sum();
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::Numeric("power iteration collapsed".into()));
        }
        let next: Vec<f64> = y.iter().map(|v| v / s).collect();
        let delta: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        lambda = s;
        if delta < tol {
            return Ok(lambda);
        }
    }
    Err(Error::Numeric(format!(
        "power iteration did not converge in {POWER_ITERATION_LIMIT} steps (last estimate {lambda})"
    )))
}

fn inverse_iteration(m: &[Vec<f64>], beta: f64) -> Result<Vec<f64>> {
    let d = m.len();
    let shift = beta + 1e-8 * beta.abs().max(1.0);
    let a: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| m[i][j] - if i == j { shift } else { 0.0 })
                .collect()
        })
        .collect();
    let mut x = vec![1.0; d];
    for _ in 0..4 {
        let mut y =
            solve(&a, &x).ok_or_else(|| Error::Numeric("singular system in inverse iteration".into()))?;
        let n = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        y.iter_mut().for_each(|v| *v /= n);
        x = y;
    }
    Ok(x)
}

/// Gaussian elimination with partial pivoting.
fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let d = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for k in 0..d {
        let p = (k..d).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[p][k] == 0.0 {
            return None;
        }
        m.swap(k, p);
        let (upper, lower) = m.split_at_mut(k + 1);
        let pivot = &upper[k];
        for row in lower {
            let f = row[k] / pivot[k];
            row[k..]
                .iter_mut()
                .zip(&pivot[k..])
                .for_each(|(a, b)| *a -= f * b);
        }
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][d] - s) / m[i][i];
    }
    Some(x)
}

impl PerronData {
    pub fn dim(&self) -> usize {
        self.right.len()
    }

    pub fn stable_dim(&self) -> usize {
        self.basis.len()
    }

    /// Component of `x` along the expanding direction, `⟨v_L, x⟩`.
    pub fn expanding_component(&self, x: &[f64]) -> f64 {
        self.left.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Projection along the expanding direction, in stable coordinates.
    pub fn project_real(&self, x: &[f64]) -> StablePoint {
        let t = self.expanding_component(x);
        let y: Vec<f64> = x.iter().zip(&self.right).map(|(xi, ui)| xi - t * ui).collect();
        StablePoint(
            self.basis
                .iter()
                .map(|b| b.iter().zip(&y).map(|(p, q)| p * q).sum())
                .collect(),
        )
    }

    pub fn project(&self, x: &AbelianVector) -> StablePoint {
        let mut out = vec![0.0; self.stable_dim()];
        self.project_counts_into(x.as_slice(), &mut out);
        StablePoint(out)
    }

    /// Linear in the counts, so summing precomputed unit images is exact up
    /// to rounding and avoids re-deriving the projection per point.
    pub(crate) fn project_counts_into(&self, counts: &[i64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (o, u) in out.iter_mut().zip(&self.unit_images[i]) {
                *o += c as f64 * u;
            }
        }
    }

    /// Inverse of the splitting: `t·u_R + Σ cᵢ·basisᵢ`.
    pub fn reconstruct(&self, point: &StablePoint, expanding: f64) -> Vec<f64> {
        let mut x: Vec<f64> = self.right.iter().map(|u| expanding * u).collect();
        for (c, b) in point.0.iter().zip(&self.basis) {
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += c * bi);
        }
        x
    }
}

pub fn project_stable(pd: &PerronData, x: &AbelianVector) -> StablePoint {
    pd.project(x)
}

/// `(d−1)×(d−1)` matrix of `M` restricted to the stable hyperplane.
#[derive(Clone, Debug, PartialEq)]
pub struct StableMatrix(pub Vec<Vec<f64>>);

impl StableMatrix {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn determinant(&self) -> f64 {
        let n = self.dim();
        let mut m = self.0.clone();
        let mut det = 1.0;
        for k in 0..n {
            let Some(p) = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())) else {
                return 1.0;
            };
            if m[p][k] == 0.0 {
                return 0.0;
            }
            if p != k {
                m.swap(k, p);
                det = -det;
            }
            det *= m[k][k];
            let (upper, lower) = m.split_at_mut(k + 1);
            let pivot = &upper[k];
            for row in lower {
                let f = row[k] / pivot[k];
                row[k..]
                    .iter_mut()
                    .zip(&pivot[k..])
                    .for_each(|(a, b)| *a -= f * b);
            }
        }
        det
    }
}

pub fn stable_action(pd: &PerronData, m: &IncidenceMatrix) -> StableMatrix {
    let d = m.dim();
    let images: Vec<Vec<f64>> = pd
        .basis
        .iter()
        .map(|b| {
            (0..d)
                .map(|i| (0..d).map(|j| m.get(i, j) as f64 * b[j]).sum())
                .collect()
        })
        .collect();
    StableMatrix(
        pd.basis
            .iter()
            .map(|bi| {
                images
                    .iter()
                    .map(|mbj| bi.iter().zip(mbj).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect(),
    )
}
