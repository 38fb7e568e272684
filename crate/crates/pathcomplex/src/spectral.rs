//! Walk matrices on links, eigenvalue machinery, and expansion checks.
//!
//! Second-eigenvalue comparisons come in two flavors: a float eigensolve of
//! the symmetrized walk, and an exact certificate that counts positive
//! eigenvalues of A - alpha*D through the characteristic polynomial's sign
//! variations (valid because symmetric matrices have real spectra).

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::complex::{ids_of, PathComplex};
use crate::error::{Error, Result};
use crate::rat::{int, pow_i, rat, to_f64, Rat};

/// Absolute tolerance for float eigenvalue comparisons.
pub const EIG_TOL: f64 = 1e-9;

/// Default size cap for exact characteristic-polynomial certification.
pub const EXACT_CAP: usize = 16;

/// Desk-scale cap on dense eigensolves.
pub const DENSE_CAP: usize = 5000;

// ----------------------------------------------------------------- matrices

fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = a.len();
    let mut out = vec![vec![int(0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[k][j].is_zero() {
                    continue;
                }
                let prod = a[i][k].clone() * b[k][j].clone();
                out[i][j] += prod;
            }
        }
    }
    out
}

fn check_symmetric(m: &[Vec<Rat>]) -> Result<()> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::NotSymmetric);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if m[i][j] != m[j][i] {
                return Err(Error::NotSymmetric);
            }
        }
    }
    Ok(())
}

/// Characteristic polynomial det(xI - M), coefficients for x^n .. x^0,
/// by the Faddeev-LeVerrier recurrence over exact rationals.
pub fn charpoly(m: &[Vec<Rat>]) -> Vec<Rat> {
    let n = m.len();
    let mut coeffs = vec![int(1)];
    if n == 0 {
        return coeffs;
    }
    let mut aux: Vec<Vec<Rat>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { int(1) } else { int(0) }).collect())
        .collect();
    let mut c = int(1);
    for k in 1..=n {
        if k > 1 {
            // aux = M * aux_prev + c_{k-1} I
            let mut next = mat_mul(m, &aux);
            for (i, row) in next.iter_mut().enumerate() {
                row[i] += c.clone();
            }
            aux = next;
        }
        let prod = mat_mul(m, &aux);
        let tr: Rat = (0..n).map(|i| prod[i][i].clone()).sum();
        c = -tr / int(k as i64);
        coeffs.push(c.clone());
    }
    coeffs
}

/// Sign variations over the nonzero coefficients: for a real-rooted
/// polynomial this equals the number of strictly positive roots.
pub fn descartes_positive_roots(coeffs: &[Rat]) -> usize {
    let mut last: Option<bool> = None;
    let mut changes = 0;
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        let pos = c.is_positive();
        if let Some(prev) = last {
            if prev != pos {
                changes += 1;
            }
        }
        last = Some(pos);
    }
    changes
}

/// Certified number of strictly positive eigenvalues of a symmetric
/// rational matrix; zero eigenvalues are non-positive.
pub fn positive_count_exact(m: &[Vec<Rat>], cap: usize) -> Result<usize> {
    check_symmetric(m)?;
    if m.len() > cap {
        return Err(Error::SizeLimitExceeded(format!(
            "{}x{} exceeds exact certification cap {cap}",
            m.len(),
            m.len()
        )));
    }
    Ok(descartes_positive_roots(&charpoly(m)))
}

/// Float eigenvalue count above `tol`, with the smallest absolute
/// eigenvalue as the decision margin.
pub fn positive_count_float(m: &[Vec<f64>], tol: f64) -> Result<(usize, f64)> {
    let n = m.len();
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSymmetric);
        }
        for (j, x) in row.iter().enumerate() {
            if (x - m[j][i]).abs() > 1e-9 {
                return Err(Error::NotSymmetric);
            }
        }
    }
    if n == 0 {
        return Ok((0, f64::INFINITY));
    }
    let dm = DMatrix::from_fn(n, n, |i, j| (m[i][j] + m[j][i]) / 2.0);
    let eig = dm.symmetric_eigen();
    let mut count = 0;
    let mut margin = f64::INFINITY;
    for &l in eig.eigenvalues.iter() {
        if !l.is_finite() {
            return Err(Error::NumericalFailure("eigensolve returned non-finite".into()));
        }
        if l > tol {
            count += 1;
        }
        margin = margin.min(l.abs());
    }
    Ok((count, margin))
}

/// How a positive-eigenvalue count was certified.
#[derive(Debug, Clone)]
pub struct CountCertificate {
    pub count: usize,
    pub method: &'static str,
    pub margin: Option<f64>,
    pub size: usize,
}

/// Exact Descartes certification up to `cap`, float counting beyond.
pub fn positive_count(m: &[Vec<Rat>], cap: usize, tol: f64) -> Result<CountCertificate> {
    if m.len() <= cap {
        let count = positive_count_exact(m, cap)?;
        Ok(CountCertificate { count, method: "exact-Descartes", margin: None, size: m.len() })
    } else {
        let fm: Vec<Vec<f64>> =
            m.iter().map(|row| row.iter().map(to_f64).collect()).collect();
        let (count, margin) = positive_count_float(&fm, tol)?;
        Ok(CountCertificate {
            count,
            method: "float-eigensolve",
            margin: Some(margin),
            size: m.len(),
        })
    }
}

// ------------------------------------------------------------- walk matrices

/// Reversible random walk on a weighted graph: symmetric edge weights,
/// transitions proportional to weight, stationary measure proportional
/// to weighted degree.
#[derive(Debug, Clone)]
pub struct WalkMatrix {
    pub labels: Vec<String>,
    /// Part tag per vertex (original type index for link walks, side
    /// index for plain bipartite graphs).
    pub part_of: Vec<usize>,
    /// Symmetric nonnegative edge weights A(x,y); zero diagonal.
    pub a: Vec<Vec<Rat>>,
    /// Weighted degrees d_w(x) = sum_y A(x,y), all strictly positive.
    pub deg: Vec<Rat>,
}

impl WalkMatrix {
    pub fn from_edges(
        labels: Vec<String>,
        part_of: Vec<usize>,
        edges: &[(usize, usize, Rat)],
    ) -> Result<WalkMatrix> {
        let n = labels.len();
        if part_of.len() != n {
            return Err(Error::IndexOutOfRange("part tags do not match labels".into()));
        }
        let mut a = vec![vec![int(0); n]; n];
        for (x, y, w) in edges {
            if *x >= n || *y >= n || x == y {
                return Err(Error::IndexOutOfRange(format!("edge ({x},{y})")));
            }
            if *w <= int(0) {
                return Err(Error::NonpositiveWeight(format!("edge ({x},{y})")));
            }
            a[*x][*y] += w.clone();
            a[*y][*x] += w.clone();
        }
        let deg: Vec<Rat> = (0..n).map(|x| a[x].iter().cloned().sum()).collect();
        for (x, d) in deg.iter().enumerate() {
            if d.is_zero() {
                return Err(Error::IsolatedVertex(labels[x].clone()));
            }
        }
        Ok(WalkMatrix { labels, part_of, a, deg })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Row-stochastic transition matrix as floats.
    pub fn p_float(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|x| {
                let d = to_f64(&self.deg[x]);
                self.a[x].iter().map(|w| to_f64(w) / d).collect()
            })
            .collect()
    }

    /// Exact transition probability P(x,y).
    pub fn p(&self, x: usize, y: usize) -> Rat {
        self.a[x][y].clone() / self.deg[x].clone()
    }

    /// Full spectrum of the walk, descending, via the symmetrization
    /// D^{-1/2} A D^{-1/2}.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n > DENSE_CAP {
            return Err(Error::SizeLimitExceeded(format!("{n} vertices")));
        }
        let d: Vec<f64> = self.deg.iter().map(|x| to_f64(x).sqrt()).collect();
        let m = DMatrix::from_fn(n, n, |i, j| to_f64(&self.a[i][j]) / (d[i] * d[j]));
        let sym = DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) / 2.0);
        let eig = sym.symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
        }
        vals.sort_by(|p, q| q.partial_cmp(p).unwrap());
        Ok(vals)
    }

    /// Second-largest eigenvalue of the walk.
    pub fn lambda2(&self) -> Result<f64> {
        let s = self.spectrum()?;
        if s.len() < 2 {
            return Err(Error::NumericalFailure("walk has a single state".into()));
        }
        Ok(s[1])
    }

    /// Exact certificate that lambda2(P) <= alpha: the congruent matrix
    /// A - alpha*D must have at most one positive eigenvalue.
    pub fn lambda2_le_exact(&self, alpha: &Rat, cap: usize) -> Result<bool> {
        let n = self.n();
        let mut m = self.a.clone();
        for x in 0..n {
            let shift = alpha.clone() * self.deg[x].clone();
            m[x][x] -= shift;
        }
        Ok(positive_count_exact(&m, cap)? <= 1)
    }

    /// Vertex ids split by part tag, ascending.
    pub fn sides(&self) -> Vec<(usize, Vec<usize>)> {
        let mut tags: Vec<usize> = self.part_of.clone();
        tags.sort_unstable();
        tags.dedup();
        tags.into_iter()
            .map(|t| (t, (0..self.n()).filter(|&x| self.part_of[x] == t).collect()))
            .collect()
    }

    /// For a bipartite walk whose first side has two vertices: the exact
    /// square of lambda2, namely trace(P_XY P_YX) - 1.
    pub fn two_by_two_square(&self) -> Result<Rat> {
        let sides = self.sides();
        if sides.len() != 2 {
            return Err(Error::NotBipartite("sides are not independent".into()));
        }
        let (xs, ys) = (sides[0].1.clone(), sides[1].1.clone());
        let (side, other) = if xs.len() == 2 {
            (xs.clone(), ys.clone())
        } else if ys.len() == 2 {
            (ys.clone(), xs.clone())
        } else {
            return Err(Error::SizeLimitExceeded("needs a side of exactly 2".into()));
        };
        // confirm no internal edges on either side
        for group in [&xs, &ys] {
            for &x in group {
                for &y in group {
                    if !self.a[x][y].is_zero() {
                        return Err(Error::NotBipartite("sides are not independent".into()));
                    }
                }
            }
        }
        // trace of P_XY P_YX; its eigenvalues are 1 and trace-1
        let mut tr = int(0);
        for &x in &side {
            for &y in &other {
                tr += self.p(x, y) * self.p(y, x);
            }
        }
        tr -= int(1);
        Ok(tr)
    }
}

/// The walk on the 1-skeleton of the link at `tau`: edge weights are the
/// probabilities that both endpoints appear together, conditioned on tau.
pub fn walk_matrix(cx: &PathComplex, tau: u128) -> Result<WalkMatrix> {
    let lk = cx.link(tau)?;
    if lk.d() < 2 {
        return Err(Error::CodimTooSmall(lk.d()));
    }
    let labels: Vec<String> = (0..lk.nv() as u32).map(|v| lk.label(v).to_string()).collect();
    let part_of: Vec<usize> = (0..lk.nv() as u32).map(|v| lk.type_index(v)).collect();
    let mut pair_w: HashMap<(u32, u32), Rat> = HashMap::new();
    for f in lk.facets() {
        for (p, &x) in f.verts.iter().enumerate() {
            for &y in &f.verts[p + 1..] {
                *pair_w.entry((x, y)).or_insert_with(|| int(0)) += f.weight.clone();
            }
        }
    }
    let edges: Vec<(usize, usize, Rat)> =
        pair_w.into_iter().map(|((x, y), w)| (x as usize, y as usize, w)).collect();
    WalkMatrix::from_edges(labels, part_of, &edges)
}

// -------------------------------------------------------- expansion profiles

#[derive(Debug, Clone)]
pub struct LinkRecord {
    pub face: Vec<String>,
    pub lambda2: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub records: Vec<LinkRecord>,
    pub max_lambda2: f64,
    pub alpha: f64,
    pub pass: bool,
    pub method: &'static str,
}

/// Second eigenvalues of every qualifying link against a target bound:
/// all links of codim >= 2, or only codim exactly 2 in top-link mode.
pub fn expansion_profile(
    cx: &PathComplex,
    alpha: f64,
    top_link_only: bool,
) -> Result<SpectralReport> {
    let d = cx.d();
    if d < 2 {
        return Err(Error::CodimTooSmall(d));
    }
    let index = cx.face_index()?;
    let mut faces: Vec<u128> = index
        .facets_of
        .keys()
        .copied()
        .filter(|&tau| {
            let met = cx.positions_met(tau).len();
            ids_of(tau).len() == met && {
                let codim = d - met;
                if top_link_only {
                    codim == 2
                } else {
                    codim >= 2
                }
            }
        })
        .collect();
    faces.sort_unstable();
    let records: Result<Vec<LinkRecord>> = faces
        .par_iter()
        .map(|&tau| {
            let w = walk_matrix(cx, tau)?;
            let l2 = w.lambda2()?;
            Ok(LinkRecord {
                face: cx.face_labels(tau),
                lambda2: l2,
                pass: l2 <= alpha + EIG_TOL,
            })
        })
        .collect();
    let records = records?;
    let max_lambda2 =
        records.iter().map(|r| r.lambda2).fold(f64::NEG_INFINITY, f64::max);
    let pass = records.iter().all(|r| r.pass);
    Ok(SpectralReport { records, max_lambda2, alpha, pass, method: "float-eigensolve" })
}

// ------------------------------------------------------------ bipartite M_ij

#[derive(Debug, Clone)]
pub struct MijVerdict {
    pub i: usize,
    pub j: usize,
    pub exact_pass: bool,
    pub lambda2: f64,
    pub bound: f64,
    pub float_pass: bool,
}

/// Restriction of the complex's skeleton walk to parts at 1-based
/// positions i and j.
pub fn bipartite_walk(cx: &PathComplex, i: usize, j: usize) -> Result<WalkMatrix> {
    let d = cx.d();
    if i < 1 || j <= i || j > d {
        return Err(Error::IndexOutOfRange(format!("part pair ({i},{j}) in dimension {d}")));
    }
    let (pi, pj) = (i - 1, j - 1);
    let mut verts: Vec<u32> = Vec::new();
    for p in [pi, pj] {
        verts.extend(cx.parts()[p].verts.iter().copied());
    }
    let pos: HashMap<u32, usize> =
        verts.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let labels: Vec<String> = verts.iter().map(|&v| cx.label(v).to_string()).collect();
    let part_of: Vec<usize> = verts.iter().map(|&v| cx.part_of(v)).collect();
    let mut pair_w: HashMap<(usize, usize), Rat> = HashMap::new();
    for f in cx.facets() {
        let x = f.verts.iter().find(|&&v| cx.part_of(v) == pi).unwrap();
        let y = f.verts.iter().find(|&&v| cx.part_of(v) == pj).unwrap();
        *pair_w.entry((pos[x], pos[y])).or_insert_with(|| int(0)) += f.weight.clone();
    }
    let edges: Vec<(usize, usize, Rat)> =
        pair_w.into_iter().map(|((x, y), w)| (x, y, w)).collect();
    WalkMatrix::from_edges(labels, part_of, &edges)
}

/// The [k]_s quantum analog (s-analog) of a nonnegative integer, exact for
/// rational s >= 1.
pub fn s_analog(k: usize, s: &Rat) -> Result<Rat> {
    if *s < int(1) {
        return Err(Error::InvalidS(format!("{s}")));
    }
    if *s == int(1) {
        return Ok(int(k as i64));
    }
    let num = pow_i(s, k as i64) - pow_i(s, -(k as i64));
    let den = s.clone() - pow_i(s, -1);
    Ok(num / den)
}

/// The s-factorial [k]_s!.
pub fn s_factorial(k: usize, s: &Rat) -> Result<Rat> {
    let mut acc = int(1);
    for i in 1..=k {
        acc *= s_analog(i, s)?;
    }
    Ok(acc)
}

/// Exact certificate for the two-part walk P_{i,j}: subtracting the
/// diagonal comparison matrix (entries (d-j+1)/(d-i+1) on T_i and i/j on
/// T_j, or their s-analogs) must leave at most one positive eigenvalue,
/// which forces lambda2 <= sqrt of the entry product.
pub fn bipartite_mij_check(
    cx: &PathComplex,
    i: usize,
    j: usize,
    s: Option<&Rat>,
) -> Result<MijVerdict> {
    let d = cx.d();
    let w = bipartite_walk(cx, i, j)?;
    let (mi, mj) = match s {
        None => (
            rat((d - j + 1) as i64, (d - i + 1) as i64),
            rat(i as i64, j as i64),
        ),
        Some(s) => (
            s_analog(d - j + 1, s)? / s_analog(d - i + 1, s)?,
            s_analog(i, s)? / s_analog(j, s)?,
        ),
    };
    let pi = i - 1;
    let mut m = w.a.clone();
    for x in 0..w.n() {
        let entry = if w.part_of[x] == pi { mi.clone() } else { mj.clone() };
        let shift = entry * w.deg[x].clone();
        m[x][x] -= shift;
    }
    let exact_pass = positive_count_exact(&m, EXACT_CAP.max(w.n()))? <= 1;
    let lambda2 = w.lambda2()?;
    let bound = (to_f64(&mi) * to_f64(&mj)).sqrt();
    Ok(MijVerdict { i, j, exact_pass, lambda2, bound, float_pass: lambda2 <= bound + EIG_TOL })
}

// -------------------------------------------------------------- d-partite

#[derive(Debug, Clone)]
pub struct DpartiteVerdict {
    pub bound: Rat,
    pub lambda2: f64,
    pub pass: bool,
}

/// Evaluates the averaged comparison bound max_i E_{j != i} m(i,j) and
/// checks the skeleton walk's lambda2 against it. Requires the partite
/// regularity w(x, T_j) = d_w(x)/(d-1) for every x and part j not
/// containing x, which is verified exactly first.
pub fn dpartite_bound(
    cx: &PathComplex,
    m: &dyn Fn(usize, usize) -> Rat,
) -> Result<DpartiteVerdict> {
    let d = cx.d();
    let w = walk_matrix(cx, 0)?;
    // regularity: per vertex, weight into each other part is deg/(d-1)
    for x in 0..w.n() {
        let expected = w.deg[x].clone() / int((d - 1) as i64);
        for part in cx.parts() {
            let tag = part.index;
            if tag == w.part_of[x] {
                continue;
            }
            let into: Rat = (0..w.n())
                .filter(|&y| w.part_of[y] == tag)
                .map(|y| w.a[x][y].clone())
                .sum();
            if into != expected {
                return Err(Error::RegularityViolated(w.labels[x].clone()));
            }
        }
    }
    let mut bound = int(0);
    for i in 1..=d {
        let mut acc = int(0);
        for j in 1..=d {
            if j != i {
                acc += m(i, j);
            }
        }
        acc /= int((d - 1) as i64);
        if acc > bound {
            bound = acc;
        }
    }
    let lambda2 = w.lambda2()?;
    let pass = lambda2 <= to_f64(&bound) + EIG_TOL;
    Ok(DpartiteVerdict { bound, lambda2, pass })
}

// ---------------------------------------------------------------- formulas

/// Descent-of-expansion bound (1-eps)/(d - (k-2)(1-eps)) for a link of
/// codimension k in a d-dimensional (1-eps)/d-top-link expander.
pub fn trickledown_bound(d: usize, k: usize, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) || k < 2 || k > d {
        return Err(Error::DomainError(format!("d={d}, k={k}, eps={eps}")));
    }
    let denom = d as f64 - (k as f64 - 2.0) * (1.0 - eps);
    if denom <= 0.0 {
        return Err(Error::DomainError("nonpositive denominator".into()));
    }
    Ok((1.0 - eps) / denom)
}

/// The s-form codimension bound
/// (2/((k-1)(s^{(k+1)/2}+1))) * ((s^{(k-1)/2}-1)/(s-1)); s=1 by limit.
pub fn s_codim_bound(k: usize, s: f64) -> Result<f64> {
    if k < 2 || s < 1.0 {
        return Err(Error::DomainError(format!("k={k}, s={s}")));
    }
    if (s - 1.0).abs() < 1e-12 {
        return Ok(0.5);
    }
    let front = 2.0 / ((k as f64 - 1.0) * (s.powf((k as f64 + 1.0) / 2.0) + 1.0));
    let tail = (s.powf((k as f64 - 1.0) / 2.0) - 1.0) / (s - 1.0);
    Ok(front * tail)
}

/// Concrete eps-form of the codimension bound: (1-2eps)/((k-1) sqrt(eps)).
pub fn eps_codim_bound(k: usize, eps: f64) -> Result<f64> {
    if k < 2 || eps <= 0.0 || eps > 0.5 {
        return Err(Error::DomainError(format!("k={k}, eps={eps}")));
    }
    Ok((1.0 - 2.0 * eps) / ((k as f64 - 1.0) * eps.sqrt()))
}

/// Conversion from a (1/2 - eps) top-link bound to the s parameter with
/// 1/(s + 1/s) = 1/2 - eps.
pub fn eps_to_s(eps: f64) -> Result<f64> {
    if eps <= 0.0 || eps >= 0.5 {
        return Err(Error::DomainError(format!("eps={eps}")));
    }
    Ok((1.0 + 2.0 * (eps - eps * eps).sqrt()) / (1.0 - 2.0 * eps))
}

// -------------------------------------------------------------- conductance

#[derive(Debug, Clone)]
pub struct CutReport {
    pub phi_s: Rat,
    pub vol_s: Rat,
    /// Exhaustive minimum over cuts with vol(S) <= vol(complement).
    pub phi_g: Option<Rat>,
    pub lambda2: f64,
    pub cheeger_ok: Option<bool>,
}

/// Conductance of a cut, optionally the graph conductance by exhaustion
/// (<= 20 vertices), and the Cheeger sandwich against lambda2.
pub fn conductance_cheeger(
    w: &WalkMatrix,
    s: &[usize],
    exhaustive: bool,
) -> Result<CutReport> {
    let n = w.n();
    if s.is_empty() || s.len() >= n {
        return Err(Error::EmptyCut);
    }
    let mut in_s = vec![false; n];
    for &x in s {
        if x >= n {
            return Err(Error::IndexOutOfRange(format!("vertex {x}")));
        }
        in_s[x] = true;
    }
    let phi_of = |in_s: &[bool]| -> (Rat, Rat) {
        let mut cut = int(0);
        let mut vol = int(0);
        for x in 0..n {
            if !in_s[x] {
                continue;
            }
            vol += w.deg[x].clone();
            for y in 0..n {
                if !in_s[y] {
                    cut += w.a[x][y].clone();
                }
            }
        }
        (cut / vol.clone(), vol)
    };
    let (phi_s, vol_s) = phi_of(&in_s);
    let lambda2 = w.lambda2()?;
    let mut phi_g = None;
    let mut cheeger_ok = None;
    if exhaustive {
        if n > 20 {
            return Err(Error::SizeLimitExceeded(format!("{n} vertices for exhaustive cuts")));
        }
        let total: Rat = w.deg.iter().cloned().sum();
        let mut best: Option<Rat> = None;
        for mask in 1u32..(1 << n) - 1 {
            let sel: Vec<bool> = (0..n).map(|x| mask & (1 << x) != 0).collect();
            let (phi, vol) = phi_of(&sel);
            if vol.clone() * int(2) > total {
                continue;
            }
            if best.as_ref().map_or(true, |b| phi < *b) {
                best = Some(phi);
            }
        }
        let phi = best.ok_or(Error::EmptyCut)?;
        let pf = to_f64(&phi);
        let lo = (1.0 - lambda2) / 2.0;
        let hi = (2.0 * (1.0 - lambda2)).max(0.0).sqrt();
        cheeger_ok = Some(lo <= pf + EIG_TOL && pf <= hi + EIG_TOL);
        phi_g = Some(phi);
    }
    Ok(CutReport { phi_s, vol_s, phi_g, lambda2, cheeger_ok })
}

// ---------------------------------------------------- unique-neighbor graphs

#[derive(Debug, Clone)]
pub struct UniqueNeighborReport {
    pub unique_neighbor: bool,
    pub connected: bool,
    /// The degree-1 criterion: no degree-1 on one side, or exactly one
    /// on each side. Only meaningful for unique-neighbor graphs.
    pub predicted_one_positive: Option<bool>,
    pub certified_count: usize,
    pub agree: Option<bool>,
}

/// Classifies a bipartite graph by the unique-neighbor property and
/// certifies the positive-eigenvalue count of A - D/2 against the
/// degree-1 criterion.
pub fn unique_neighbor_classify(
    nx: usize,
    ny: usize,
    edges: &[(usize, usize)],
) -> Result<UniqueNeighborReport> {
    if nx == 0 || ny == 0 {
        return Err(Error::EmptySet);
    }
    let n = nx + ny;
    let mut adj = vec![vec![false; n]; n];
    for &(x, y) in edges {
        if x >= nx || y >= ny {
            return Err(Error::NotBipartite("sides are not independent".into()));
        }
        adj[x][nx + y] = true;
        adj[nx + y][x] = true;
    }
    let deg: Vec<usize> = (0..n).map(|v| adj[v].iter().filter(|&&b| b).count()).collect();
    if deg.iter().any(|&d| d == 0) {
        return Err(Error::IsolatedVertex("degree zero in bipartite input".into()));
    }
    // unique-neighbor: same-side pairs share exactly one common neighbor
    let mut unp = true;
    'outer: for side in [(0, nx), (nx, n)] {
        for u in side.0..side.1 {
            for v in u + 1..side.1 {
                let common =
                    (0..n).filter(|&w| adj[u][w] && adj[v][w]).count();
                if common != 1 {
                    unp = false;
                    break 'outer;
                }
            }
        }
    }
    // connectivity by sweep
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for u in 0..n {
            if adj[v][u] && !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    let connected = seen.iter().all(|&b| b);
    let d1x = (0..nx).filter(|&v| deg[v] == 1).count();
    let d1y = (nx..n).filter(|&v| deg[v] == 1).count();
    let predicted = if unp {
        Some(d1x == 0 || d1y == 0 || (d1x == 1 && d1y == 1))
    } else {
        None
    };
    // A - D/2, exact
    let m: Vec<Vec<Rat>> = (0..n)
        .map(|u| {
            (0..n)
                .map(|v| {
                    if u == v {
                        -rat(deg[u] as i64, 2)
                    } else if adj[u][v] {
                        int(1)
                    } else {
                        int(0)
                    }
                })
                .collect()
        })
        .collect();
    let certified_count = positive_count_exact(&m, n.max(EXACT_CAP))?;
    let agree = predicted.map(|p| p == (certified_count == 1));
    Ok(UniqueNeighborReport {
        unique_neighbor: unp,
        connected,
        predicted_one_positive: predicted,
        certified_count,
        agree,
    })
}

/// Eigenvalues of the 0/1 adjacency matrix of a bipartite graph,
/// descending. Sides are 0-based; edges must respect them.
pub fn bipartite_adjacency_spectrum(
    nx: usize,
    ny: usize,
    edges: &[(usize, usize)],
) -> Result<Vec<f64>> {
    if nx == 0 || ny == 0 {
        return Err(Error::EmptySet);
    }
    let n = nx + ny;
    if n > DENSE_CAP {
        return Err(Error::SizeLimitExceeded(format!("{n} vertices")));
    }
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    for &(x, y) in edges {
        if x >= nx || y >= ny {
            return Err(Error::NotBipartite("sides are not independent".into()));
        }
        a[(x, nx + y)] = 1.0;
        a[(nx + y, x)] = 1.0;
    }
    let mut eig: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|p, q| q.partial_cmp(p).expect("finite eigenvalues"));
    Ok(eig)
}

/// One codimension-2 face's colored quadratic verdict.
#[derive(Debug, Clone)]
pub struct ColoredRecord {
    pub face: Vec<String>,
    pub positive_count: usize,
}

#[derive(Debug, Clone)]
pub struct ColoredReport {
    pub records: Vec<ColoredRecord>,
    pub pass: bool,
    pub witness: Option<Vec<String>>,
}

/// The colored expansion test: at every link-contiguous codimension-2
/// face, the quadratic Hessian shaped by the coloring must have at
/// most one positive eigenvalue (certified exactly). Non-contiguous
/// codimension-2 faces are skipped; their quadratics are rank-2 with
/// zero diagonal and always qualify.
pub fn colored_toplink_check(ctx: &crate::lorentzian::AbCtx) -> Result<ColoredReport> {
    let (quads, witness) = crate::lorentzian::quadratic_records(ctx)?;
    let records: Vec<ColoredRecord> = quads
        .into_iter()
        .map(|q| ColoredRecord { face: q.face, positive_count: q.positive_count })
        .collect();
    let pass = records.iter().all(|r| r.positive_count <= 1);
    Ok(ColoredReport { records, pass, witness })
}
