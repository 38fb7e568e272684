//! Small matroids given by explicit bases or a multigraph, their lattice of
//! flats, and the log-concave coefficient sequence attached to the lattice.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::order::{moebius, Caps, MoebiusTable, RankedLattice};
use crate::rat::{int, Rat};

#[derive(Debug, Clone)]
pub enum MatroidSpec {
    Bases { ground: usize, bases: Vec<Vec<usize>> },
    Graphic { vertices: usize, edges: Vec<(usize, usize)> },
}

#[derive(Debug, Clone)]
pub struct Matroid {
    n: usize,
    bases: Vec<u64>,
    loops: u64,
    rank_full: usize,
    labels: Vec<String>,
}

pub fn construct_matroid(spec: &MatroidSpec) -> Result<Matroid> {
    match spec {
        MatroidSpec::Bases { ground, bases } => Matroid::from_bases(*ground, bases),
        MatroidSpec::Graphic { vertices, edges } => Matroid::graphic(*vertices, edges),
    }
}

fn fmt_set(mask: u64) -> String {
    let mut parts = Vec::new();
    for b in 0..64 {
        if mask & (1 << b) != 0 {
            parts.push(b.to_string());
        }
    }
    format!("{{{}}}", parts.join(","))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }

    /// Returns false when x and y were already joined.
    fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        self.0[rx] = ry;
        true
    }
}

impl Matroid {
    pub fn from_bases(ground: usize, bases_in: &[Vec<usize>]) -> Result<Matroid> {
        if ground == 0 || ground > 63 {
            return Err(Error::SizeLimitExceeded(format!("ground set of size {ground}")));
        }
        if bases_in.is_empty() {
            return Err(Error::EmptyBasesList);
        }
        let mut bases: Vec<u64> = Vec::new();
        for b in bases_in {
            let mut mask = 0u64;
            for &e in b {
                if e >= ground {
                    return Err(Error::IndexOutOfRange(format!("basis element {e}")));
                }
                mask |= 1 << e;
            }
            if mask.count_ones() as usize != b.len() {
                return Err(Error::Input(format!("repeated element in basis {b:?}")));
            }
            if !bases.contains(&mask) {
                bases.push(mask);
            }
        }
        bases.sort_unstable();
        let r = bases[0].count_ones() as usize;
        if bases.iter().any(|b| b.count_ones() as usize != r) {
            return Err(Error::ExchangeAxiomViolation("bases are not equicardinal".into()));
        }
        // Exchange axiom: for B1, B2 and e in B1 \ B2 there is f in B2 \ B1
        // with B1 - e + f a basis.
        for &b1 in &bases {
            for &b2 in &bases {
                let lose = b1 & !b2;
                for e in 0..ground {
                    if lose & (1 << e) == 0 {
                        continue;
                    }
                    let gain = b2 & !b1;
                    let found = (0..ground).any(|f| {
                        gain & (1 << f) != 0 && bases.binary_search(&((b1 & !(1 << e)) | (1 << f))).is_ok()
                    });
                    if !found {
                        return Err(Error::ExchangeAxiomViolation(format!(
                            "bases {} and {}: no exchange for element {e}",
                            fmt_set(b1),
                            fmt_set(b2)
                        )));
                    }
                }
            }
        }
        let labels = (0..ground).map(|i| format!("e{i:02}")).collect();
        let mut m = Matroid { n: ground, bases, loops: 0, rank_full: r, labels };
        m.loops = m.closure(0);
        Ok(m)
    }

    /// Cycle matroid of a multigraph; self-edges become loops.
    pub fn graphic(vertices: usize, edges: &[(usize, usize)]) -> Result<Matroid> {
        if edges.is_empty() {
            return Err(Error::EmptySet);
        }
        if edges.len() > 20 {
            return Err(Error::SizeLimitExceeded(format!("{} edges", edges.len())));
        }
        for &(a, b) in edges {
            if a >= vertices || b >= vertices {
                return Err(Error::IndexOutOfRange(format!("edge ({a},{b})")));
            }
        }
        let n = edges.len();
        // Rank = vertices - number of connected components.
        let mut uf = UnionFind::new(vertices);
        let mut r = 0usize;
        for &(a, b) in edges {
            if uf.union(a, b) {
                r += 1;
            }
        }
        // Bases = spanning forests, i.e. acyclic edge sets of size r.
        let mut bases = Vec::new();
        let mut pick = Vec::new();
        fn rec(
            edges: &[(usize, usize)],
            vertices: usize,
            start: usize,
            r: usize,
            pick: &mut Vec<usize>,
            bases: &mut Vec<u64>,
        ) {
            if pick.len() == r {
                let mut uf = UnionFind::new(vertices);
                if pick.iter().all(|&i| uf.union(edges[i].0, edges[i].1)) {
                    bases.push(pick.iter().fold(0u64, |m, &i| m | (1 << i)));
                }
                return;
            }
            for i in start..edges.len() {
                pick.push(i);
                rec(edges, vertices, i + 1, r, pick, bases);
                pick.pop();
            }
        }
        rec(edges, vertices, 0, r, &mut pick, &mut bases);
        if bases.is_empty() {
            // r = 0: the empty forest is the one basis.
            bases.push(0);
        }
        bases.sort_unstable();
        let labels = (0..n).map(|i| format!("e{i:02}")).collect();
        let mut m = Matroid { n, bases, loops: 0, rank_full: r, labels };
        m.loops = m.closure(0);
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank_full(&self) -> usize {
        self.rank_full
    }

    pub fn bases(&self) -> &[u64] {
        &self.bases
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn loops(&self) -> u64 {
        self.loops
    }

    pub fn n0(&self) -> usize {
        self.loops.count_ones() as usize
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.loops & (1 << e) != 0
    }

    /// Rank of a subset: the largest overlap with a basis.
    pub fn rank(&self, mask: u64) -> usize {
        self.bases.iter().map(|b| (b & mask).count_ones() as usize).max().unwrap_or(0)
    }

    /// Smallest flat containing the subset.
    pub fn closure(&self, mask: u64) -> u64 {
        let r = self.rank(mask);
        let mut out = mask;
        for e in 0..self.n {
            if out & (1 << e) == 0 && self.rank(mask | (1 << e)) == r {
                out |= 1 << e;
            }
        }
        out
    }

    pub fn is_flat(&self, mask: u64) -> bool {
        self.closure(mask) == mask
    }

    /// Every flat, sorted by (rank, bitset).
    pub fn flats(&self, caps: &Caps) -> Result<Vec<u64>> {
        if self.n > caps.max_poset_elements {
            return Err(Error::SizeLimitExceeded(format!(
                "{} ground elements exceed the flat enumeration cap {}",
                self.n, caps.max_poset_elements
            )));
        }
        let mut out: Vec<u64> =
            (0u64..(1 << self.n)).filter(|&m| self.is_flat(m)).collect();
        out.sort_by_key(|m| (self.rank(*m), *m));
        Ok(out)
    }
}

pub fn flat_lattice(m: &Matroid, caps: &Caps) -> Result<RankedLattice> {
    let flats = m.flats(caps)?;
    let pairs = flats.into_iter().map(|f| (f, m.rank(f))).collect();
    RankedLattice::from_flats(m.labels().to_vec(), pairs)
}

/// Semimodularity of the flat lattice: rk(F)+rk(G) >= rk(F v G)+rk(F ^ G).
pub fn is_semimodular(lat: &RankedLattice) -> Result<bool> {
    for f in 0..lat.len() {
        for g in 0..lat.len() {
            let m = lat.meet(f, g)?;
            let j = lat.join(f, g)?;
            if lat.rank_of(f) + lat.rank_of(g) < lat.rank_of(m) + lat.rank_of(j) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Cover partition property: for every proper flat F, the sets G \ F over
/// covers G of F partition the complement of F.
pub fn partition_property_holds(lat: &RankedLattice, ground_size: usize) -> bool {
    for f in 0..lat.len() {
        if f == lat.top() {
            continue;
        }
        let mut union = 0u64;
        let mut total = 0u32;
        for &g in lat.covers_up(f) {
            let extra = lat.flat(g) & !lat.flat(f);
            total += extra.count_ones();
            union |= extra;
        }
        let missing = ground_size as u32 - lat.flat(f).count_ones();
        // disjoint (sum equals union size) and covering (equals complement)
        if total != missing || union.count_ones() != missing {
            return false;
        }
    }
    true
}

/// Weisner consistency: (|L|-|K|) mu(K,L) = -sum over K <= G covered by L
/// of (|L|-|G|) mu(K,G). The G = K term matters when K is a coatom of L.
/// Exact, all comparable pairs.
pub fn weisner_consistent(lat: &RankedLattice, tbl: &MoebiusTable) -> bool {
    for k in 0..lat.len() {
        for l in 0..lat.len() {
            if !lat.lt(k, l) {
                continue;
            }
            let card = |i: usize| BigInt::from(lat.flat(i).count_ones());
            let lhs = (card(l) - card(k)) * tbl.get(k, l).unwrap();
            let mut rhs = BigInt::zero();
            for g in 0..lat.len() {
                // inclusion plus rank step 1 says G is covered by L
                if lat.le(k, g) && lat.lt(g, l) && lat.rank_of(g) + 1 == lat.rank_of(l) {
                    rhs += (card(l) - card(g)) * tbl.get(k, g).unwrap();
                }
            }
            if lhs != -rhs {
                return false;
            }
        }
    }
    true
}

/// Coefficients of the reduced characteristic polynomial in descending
/// powers, computed from the Moebius table over flats avoiding `i`.
pub fn reduced_char_poly(m: &Matroid, i: usize, caps: &Caps) -> Result<Vec<BigInt>> {
    if i >= m.n() {
        return Err(Error::IndexOutOfRange(format!("element {i}")));
    }
    if m.is_loop(i) {
        return Err(Error::LoopElement(m.labels()[i].clone()));
    }
    let lat = flat_lattice(m, caps)?;
    let tbl = moebius(&lat)?;
    let d = m.rank_full() - 1;
    let mut coeffs = vec![BigInt::zero(); d + 1];
    for f in 0..lat.len() {
        if lat.flat(f) & (1 << i) != 0 {
            continue;
        }
        let crk = m.rank_full() - lat.rank_of(f);
        // x^(crk-1) lands at descending index d - (crk-1).
        coeffs[d + 1 - crk] += tbl.from_bottom(&lat, f);
    }
    Ok(coeffs)
}

#[derive(Debug, Clone)]
pub struct HrwReport {
    pub c: Vec<Rat>,
    pub log_concave: bool,
    pub failure_k: Option<usize>,
}

/// The weighted Moebius sums (c_0..c_d) over rank-k flats; exact, with the
/// log-concavity verdict.
pub fn hrw_sequence(m: &Matroid, caps: &Caps) -> Result<HrwReport> {
    let lat = flat_lattice(m, caps)?;
    let tbl = moebius(&lat)?;
    let d = m.rank_full() - 1;
    let n = int(m.n() as i64);
    let n0 = int(m.n0() as i64);
    let denom = n.clone() - n0;
    if denom.is_zero() {
        return Err(Error::DomainError("matroid of rank zero".into()));
    }
    let mut c = vec![int(0); d + 1];
    for f in 0..lat.len() {
        let k = lat.rank_of(f);
        if k > d {
            continue;
        }
        let mu = tbl.from_bottom(&lat, f);
        let card = int(lat.flat(f).count_ones() as i64);
        c[k] += (n.clone() - card) / denom.clone() * Rat::from_integer(mu.abs());
    }
    let mut failure_k = None;
    for k in 1..d {
        if c[k].clone() * c[k].clone() < c[k - 1].clone() * c[k + 1].clone() {
            failure_k = Some(k);
            break;
        }
    }
    Ok(HrwReport { log_concave: failure_k.is_none(), c, failure_k })
}
