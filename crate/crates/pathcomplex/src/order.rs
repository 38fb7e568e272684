//! Posets, downset lattices, ranked lattices, linear extensions, and
//! Moebius tables, together with the structural predicates used elsewhere
//! (modularity, typicality, consistency of a marked set, order-reversing
//! weights).

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rat::{int, rat, Rat};

/// Enumeration caps. Exceeding a cap is a clean error, never silent
/// truncation.
#[derive(Debug, Clone)]
pub struct Caps {
    /// Elements allowed in extension/downset enumeration.
    pub max_poset_elements: usize,
    /// Flats allowed in a materialized lattice.
    pub max_lattice_flats: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_poset_elements: 12, max_lattice_flats: 1_000_000 }
    }
}

/// A finite poset on at most 63 labelled elements.
///
/// Element ids index `labels`, which is sorted, so id order is label order
/// and every enumeration downstream is deterministic.
#[derive(Debug, Clone)]
pub struct Poset {
    labels: Vec<String>,
    covers: Vec<(usize, usize)>,
    /// `up[i]` is the bitset of all j with i <= j, including i itself.
    up: Vec<u64>,
    warnings: Vec<String>,
}

pub fn build_poset<S: AsRef<str>>(elements: &[S], covers: &[(S, S)]) -> Result<Poset> {
    let mut labels: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
    if labels.is_empty() {
        return Err(Error::EmptySet);
    }
    labels.sort();
    for w in labels.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateLabel(w[0].clone()));
        }
    }
    if labels.len() > 63 {
        return Err(Error::SizeLimitExceeded(format!(
            "{} elements exceed the 63-element representation limit",
            labels.len()
        )));
    }
    let idx = |s: &str| -> Result<usize> {
        labels
            .binary_search_by(|l| l.as_str().cmp(s))
            .map_err(|_| Error::UnknownLabel(s.to_string()))
    };
    let n = labels.len();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (a, b) in covers {
        let (a, b) = (idx(a.as_ref())?, idx(b.as_ref())?);
        if a == b {
            return Err(Error::CycleDetected(labels[a].clone()));
        }
        if !edges.contains(&(a, b)) {
            edges.push((a, b));
        }
    }

    // Cycle check by Kahn's algorithm on the cover digraph.
    let mut indeg = vec![0usize; n];
    for &(_, b) in &edges {
        indeg[b] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &(a, b) in &edges {
            if a == v {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    queue.push(b);
                }
            }
        }
    }
    if seen < n {
        let culprit = (0..n).find(|&i| indeg[i] > 0).unwrap();
        return Err(Error::CycleDetected(labels[culprit].clone()));
    }

    // Reachability closure: up[i] = everything above i.
    let mut up: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    // Repeated relaxation; n is tiny.
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in &edges {
            let merged = up[a] | up[b];
            if merged != up[a] {
                up[a] = merged;
                changed = true;
            }
        }
    }

    // A cover (a,b) is redundant when b is reachable from a without it.
    let mut warnings = Vec::new();
    let mut kept: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in &edges {
        let mut reach = 1u64 << a;
        let mut frontier = vec![a];
        while let Some(v) = frontier.pop() {
            for &(x, y) in &edges {
                if x == v && (x, y) != (a, b) && reach & (1 << y) == 0 {
                    reach |= 1 << y;
                    frontier.push(y);
                }
            }
        }
        if reach & (1 << b) != 0 {
            warnings.push(format!(
                "redundant cover ({}, {}) ignored: already implied transitively",
                labels[a], labels[b]
            ));
        } else {
            kept.push((a, b));
        }
    }
    kept.sort();
    Ok(Poset { labels, covers: kept, up, warnings })
}

impl Poset {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(label))
            .map_err(|_| Error::UnknownLabel(label.to_string()))
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// i <= j in the order.
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.up[i] & (1 << j) != 0
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.le(i, j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.le(i, j) || self.le(j, i)
    }

    /// Bitset of elements >= i, including i.
    pub fn up_set(&self, i: usize) -> u64 {
        self.up[i]
    }

    /// Bitset of elements <= i, including i.
    pub fn down_set(&self, i: usize) -> u64 {
        (0..self.n()).filter(|&j| self.le(j, i)).fold(0, |m, j| m | (1 << j))
    }

    fn minimals(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| (0..self.n()).all(|j| j == i || !self.lt(j, i)))
            .collect()
    }

    fn maximals(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| (0..self.n()).all(|j| j == i || !self.lt(i, j)))
            .collect()
    }

    /// All downsets as bitsets: D is a downset when b in D and a <= b force
    /// a in D. Checking the generating covers suffices.
    pub fn downsets(&self, caps: &Caps) -> Result<Vec<u64>> {
        if self.n() > caps.max_poset_elements {
            return Err(Error::SizeLimitExceeded(format!(
                "{} elements exceed the downset enumeration cap {}",
                self.n(),
                caps.max_poset_elements
            )));
        }
        let n = self.n();
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << n) {
            let ok = self
                .covers
                .iter()
                .all(|&(a, b)| mask & (1 << b) == 0 || mask & (1 << a) != 0);
            if ok {
                out.push(mask);
            }
            if out.len() > caps.max_lattice_flats {
                return Err(Error::SizeLimitExceeded("downset count beyond cap".into()));
            }
        }
        out.sort_by_key(|m| (m.count_ones(), *m));
        Ok(out)
    }
}

/// A linear extension: a bijection from elements to {1..=n} respecting the
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearExtension {
    /// `seq[k]` is the element with value k+1.
    pub seq: Vec<usize>,
}

impl LinearExtension {
    /// 1-based value of an element.
    pub fn value(&self, elem: usize) -> usize {
        self.seq.iter().position(|&e| e == elem).expect("element in extension") + 1
    }

    /// Smallest value attained on the bitset `a`; elements of `a` must be
    /// nonempty within the extension.
    pub fn lmin(&self, a: u64) -> usize {
        self.seq
            .iter()
            .position(|&e| a & (1 << e) != 0)
            .expect("marked set meets the extension")
            + 1
    }
}

/// Exhaustive, duplicate-free, lexicographically ordered list of linear
/// extensions.
pub fn linear_extensions(p: &Poset, caps: &Caps) -> Result<Vec<LinearExtension>> {
    if p.n() > caps.max_poset_elements {
        return Err(Error::SizeLimitExceeded(format!(
            "{} elements exceed the extension enumeration cap {}",
            p.n(),
            caps.max_poset_elements
        )));
    }
    let n = p.n();
    let mut out = Vec::new();
    let mut seq = Vec::with_capacity(n);
    let mut used = 0u64;
    fn rec(p: &Poset, n: usize, used: &mut u64, seq: &mut Vec<usize>, out: &mut Vec<LinearExtension>) {
        if seq.len() == n {
            out.push(LinearExtension { seq: seq.clone() });
            return;
        }
        for e in 0..n {
            if *used & (1 << e) != 0 {
                continue;
            }
            // e is admissible when everything strictly below it is placed.
            let below = p.down_set(e) & !(1u64 << e);
            if below & !*used != 0 {
                continue;
            }
            *used |= 1 << e;
            seq.push(e);
            rec(p, n, used, seq, out);
            seq.pop();
            *used &= !(1 << e);
        }
    }
    rec(p, n, &mut used, &mut seq, &mut out);
    Ok(out)
}

/// A ranked lattice whose flats are bitsets over a ground label set,
/// ordered by inclusion.
#[derive(Debug, Clone)]
pub struct RankedLattice {
    base_labels: Vec<String>,
    flats: Vec<u64>,
    rank: Vec<usize>,
    index: HashMap<u64, usize>,
    covers_up: Vec<Vec<usize>>,
    bottom: usize,
    top: usize,
}

impl RankedLattice {
    /// Builds and validates a ranked lattice from (bitset, rank) pairs.
    pub fn from_flats(base_labels: Vec<String>, mut flats: Vec<(u64, usize)>) -> Result<Self> {
        if flats.is_empty() {
            return Err(Error::EmptySet);
        }
        flats.sort_by_key(|&(m, r)| (r, m));
        for w in flats.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Input(format!("duplicate flat {:#b}", w[0].0)));
            }
        }
        let masks: Vec<u64> = flats.iter().map(|&(m, _)| m).collect();
        let rank: Vec<usize> = flats.iter().map(|&(_, r)| r).collect();
        let n = masks.len();
        let index: HashMap<u64, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();

        // Unique bottom and top under inclusion.
        let is_sub = |a: u64, b: u64| a & !b == 0;
        let minimals: Vec<usize> = (0..n)
            .filter(|&i| (0..n).all(|j| j == i || !(is_sub(masks[j], masks[i]) && masks[j] != masks[i])))
            .collect();
        let maximals: Vec<usize> = (0..n)
            .filter(|&i| (0..n).all(|j| j == i || !(is_sub(masks[i], masks[j]) && masks[j] != masks[i])))
            .collect();
        if minimals.len() != 1 || maximals.len() != 1 {
            return Err(Error::NotRanked("lattice needs a unique bottom and top".into()));
        }
        let (bottom, top) = (minimals[0], maximals[0]);
        if rank[bottom] != 0 {
            return Err(Error::NotRanked("bottom must have rank 0".into()));
        }

        // Rank strictly monotone along inclusion, covers step by exactly 1.
        for i in 0..n {
            for j in 0..n {
                if i != j && is_sub(masks[i], masks[j]) {
                    if rank[i] >= rank[j] {
                        return Err(Error::NotRanked("rank not monotone with inclusion".into()));
                    }
                    if rank[j] > rank[i] + 1 {
                        // must not be a cover: some flat strictly between
                        let between = (0..n).any(|k| {
                            k != i
                                && k != j
                                && is_sub(masks[i], masks[k])
                                && is_sub(masks[k], masks[j])
                        });
                        if !between {
                            return Err(Error::NotRanked(format!(
                                "cover jumps from rank {} to {}",
                                rank[i], rank[j]
                            )));
                        }
                    }
                }
            }
        }

        let mut covers_up = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i != j && is_sub(masks[i], masks[j]) && rank[j] == rank[i] + 1 {
                    covers_up[i].push(j);
                }
            }
        }

        Ok(RankedLattice { base_labels, flats: masks, rank, index, covers_up, bottom, top })
    }

    pub fn len(&self) -> usize {
        self.flats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flats.is_empty()
    }

    pub fn base_labels(&self) -> &[String] {
        &self.base_labels
    }

    pub fn flat(&self, i: usize) -> u64 {
        self.flats[i]
    }

    pub fn rank_of(&self, i: usize) -> usize {
        self.rank[i]
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    /// Rank of the top flat.
    pub fn height(&self) -> usize {
        self.rank[self.top]
    }

    pub fn find(&self, mask: u64) -> Option<usize> {
        self.index.get(&mask).copied()
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        self.flats[i] & !self.flats[j] == 0
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.le(i, j)
    }

    pub fn covers_up(&self, i: usize) -> &[usize] {
        &self.covers_up[i]
    }

    /// Printable form of a flat, e.g. `{a,c}`.
    pub fn flat_label(&self, i: usize) -> String {
        let mut parts = Vec::new();
        for (b, lab) in self.base_labels.iter().enumerate() {
            if self.flats[i] & (1 << b) != 0 {
                parts.push(lab.as_str());
            }
        }
        format!("{{{}}}", parts.join(","))
    }

    /// Greatest lower bound among stored flats.
    pub fn meet(&self, i: usize, j: usize) -> Result<usize> {
        let m = self.flats[i] & self.flats[j];
        if let Some(&k) = self.index.get(&m) {
            return Ok(k);
        }
        let lower: Vec<usize> =
            (0..self.len()).filter(|&k| self.le(k, i) && self.le(k, j)).collect();
        let &best = lower
            .iter()
            .max_by_key(|&&k| self.rank[k])
            .ok_or_else(|| Error::NotRanked("no common lower bound".into()))?;
        if lower.iter().all(|&k| self.le(k, best)) {
            Ok(best)
        } else {
            Err(Error::NotRanked(format!(
                "meet of {} and {} is not unique",
                self.flat_label(i),
                self.flat_label(j)
            )))
        }
    }

    /// Least upper bound among stored flats.
    pub fn join(&self, i: usize, j: usize) -> Result<usize> {
        let m = self.flats[i] | self.flats[j];
        if let Some(&k) = self.index.get(&m) {
            return Ok(k);
        }
        let upper: Vec<usize> =
            (0..self.len()).filter(|&k| self.le(i, k) && self.le(j, k)).collect();
        let &best = upper
            .iter()
            .min_by_key(|&&k| self.rank[k])
            .ok_or_else(|| Error::NotRanked("no common upper bound".into()))?;
        if upper.iter().all(|&k| self.le(best, k)) {
            Ok(best)
        } else {
            Err(Error::NotRanked(format!(
                "join of {} and {} is not unique",
                self.flat_label(i),
                self.flat_label(j)
            )))
        }
    }

    /// All maximal chains bottom..top as flat-id sequences (inclusive).
    pub fn maximal_chains(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut chain = vec![self.bottom];
        self.chains_rec(&mut chain, &mut out);
        out
    }

    fn chains_rec(&self, chain: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *chain.last().unwrap();
        if last == self.top {
            out.push(chain.clone());
            return;
        }
        for &nxt in &self.covers_up[last] {
            chain.push(nxt);
            self.chains_rec(chain, out);
            chain.pop();
        }
    }
}

/// The lattice of downsets of a poset, ranked by cardinality.
pub fn birkhoff_lattice(p: &Poset, caps: &Caps) -> Result<RankedLattice> {
    let downs = p.downsets(caps)?;
    if downs.len() > caps.max_lattice_flats {
        return Err(Error::SizeLimitExceeded("downset count beyond cap".into()));
    }
    let flats = downs.into_iter().map(|m| (m, m.count_ones() as usize)).collect();
    RankedLattice::from_flats(p.labels().to_vec(), flats)
}

/// Exact Moebius values for all pairs F <= G.
#[derive(Debug, Clone)]
pub struct MoebiusTable {
    vals: HashMap<(usize, usize), BigInt>,
}

impl MoebiusTable {
    pub fn get(&self, k: usize, l: usize) -> Option<&BigInt> {
        self.vals.get(&(k, l))
    }

    /// Moebius value from the bottom flat.
    pub fn from_bottom(&self, lat: &RankedLattice, l: usize) -> BigInt {
        self.vals.get(&(lat.bottom(), l)).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&(usize, usize), &BigInt)> {
        self.vals.iter()
    }
}

pub fn moebius(lat: &RankedLattice) -> Result<MoebiusTable> {
    let n = lat.len();
    if n > 5000 {
        return Err(Error::SizeLimitExceeded(format!("moebius table on {n} flats")));
    }
    let mut vals: HashMap<(usize, usize), BigInt> = HashMap::new();
    // Flats are rank-sorted, so iterating l upward sees all F < l first.
    for k in 0..n {
        for l in k..n {
            if !lat.le(k, l) {
                continue;
            }
            if k == l {
                vals.insert((k, k), BigInt::one());
                continue;
            }
            let mut acc = BigInt::zero();
            for f in k..l {
                if lat.le(k, f) && lat.lt(f, l) {
                    acc += vals.get(&(k, f)).expect("filled in rank order");
                }
            }
            vals.insert((k, l), -acc);
        }
    }
    Ok(MoebiusTable { vals })
}

/// The interval {K : F <= K <= G} with ranks shifted so rk(F) = 0.
pub fn interval_sublattice(lat: &RankedLattice, f: usize, g: usize) -> Result<RankedLattice> {
    if !lat.le(f, g) {
        return Err(Error::NotComparable(lat.flat_label(f), lat.flat_label(g)));
    }
    let base = lat.base_labels().to_vec();
    let shift = lat.rank_of(f);
    let flats: Vec<(u64, usize)> = (0..lat.len())
        .filter(|&k| lat.le(f, k) && lat.le(k, g))
        .map(|k| (lat.flat(k), lat.rank_of(k) - shift))
        .collect();
    RankedLattice::from_flats(base, flats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeClass {
    pub distributive: bool,
    pub modular: bool,
    pub typical_modular: bool,
}

/// Checks distributivity (triple identity), modularity (rank identity),
/// and typicality (degree-1 condition in every rank-3 interval).
pub fn classify_lattice(lat: &RankedLattice) -> Result<LatticeClass> {
    let n = lat.len();
    if n > 512 {
        return Err(Error::SizeLimitExceeded(format!("classification on {n} flats")));
    }

    let mut distributive = true;
    'outer: for f in 0..n {
        for g in 0..n {
            for k in 0..n {
                let lhs = lat.meet(f, lat.join(g, k)?)?;
                let rhs = lat.join(lat.meet(f, g)?, lat.meet(f, k)?)?;
                if lhs != rhs {
                    distributive = false;
                    break 'outer;
                }
            }
        }
    }

    let mut modular = true;
    'pairs: for f in 0..n {
        for g in 0..n {
            let m = lat.meet(f, g)?;
            let j = lat.join(f, g)?;
            if lat.rank_of(f) + lat.rank_of(g) != lat.rank_of(m) + lat.rank_of(j) {
                modular = false;
                break 'pairs;
            }
        }
    }

    let mut typical_modular = true;
    'ivals: for f in 0..n {
        for g in 0..n {
            if !lat.lt(f, g) || lat.rank_of(g) != lat.rank_of(f) + 3 {
                continue;
            }
            let side1: Vec<usize> = (0..n)
                .filter(|&k| lat.le(f, k) && lat.le(k, g) && lat.rank_of(k) == lat.rank_of(f) + 1)
                .collect();
            let side2: Vec<usize> = (0..n)
                .filter(|&k| lat.le(f, k) && lat.le(k, g) && lat.rank_of(k) == lat.rank_of(f) + 2)
                .collect();
            let deg1_low = side1
                .iter()
                .filter(|&&a| side2.iter().filter(|&&b| lat.le(a, b)).count() == 1)
                .count();
            let deg1_high = side2
                .iter()
                .filter(|&&b| side1.iter().filter(|&&a| lat.le(a, b)).count() == 1)
                .count();
            let ok = deg1_low == 0 || deg1_high == 0 || (deg1_low == 1 && deg1_high == 1);
            if !ok {
                typical_modular = false;
                break 'ivals;
            }
        }
    }

    Ok(LatticeClass { distributive, modular, typical_modular })
}

/// Positive weights on poset elements; flats lift multiplicatively.
pub type ElementWeights = HashMap<String, Rat>;

/// Product of element weights over the members of a flat bitset.
pub fn lift_flat_weight(base_labels: &[String], flat: u64, psi: &ElementWeights) -> Result<Rat> {
    let mut acc = int(1);
    for (b, lab) in base_labels.iter().enumerate() {
        if flat & (1 << b) != 0 {
            let w = psi.get(lab).ok_or_else(|| Error::MissingWeight(lab.clone()))?;
            if *w <= int(0) {
                return Err(Error::NonpositiveWeight(format!("psi({lab})")));
            }
            acc *= w;
        }
    }
    Ok(acc)
}

/// True iff every comparable pair i <= j has psi(i) >= psi(j).
pub fn is_order_reversing(p: &Poset, psi: &ElementWeights) -> Result<bool> {
    let mut w = Vec::with_capacity(p.n());
    for lab in p.labels() {
        w.push(psi.get(lab).ok_or_else(|| Error::MissingWeight(lab.clone()))?.clone());
    }
    for i in 0..p.n() {
        for j in 0..p.n() {
            if p.lt(i, j) && w[i] < w[j] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct Consistency {
    pub holds: bool,
    /// A violating triple (a, b, c) with b covered by c, a and c marked,
    /// b unmarked, a incomparable to both.
    pub witness: Option<(String, String, String)>,
}

/// Checks the marked-set condition: for every cover b < c with c marked and
/// b unmarked, every marked a is comparable to b or to c.
pub fn is_p_consistent<S: AsRef<str>>(p: &Poset, marked: &[S]) -> Result<Consistency> {
    let mut mask = 0u64;
    for s in marked {
        mask |= 1 << p.index_of(s.as_ref())?;
    }
    for &(b, c) in p.covers() {
        if mask & (1 << c) == 0 || mask & (1 << b) != 0 {
            continue;
        }
        for a in 0..p.n() {
            if mask & (1 << a) == 0 || a == c {
                continue;
            }
            if !p.comparable(a, b) && !p.comparable(a, c) {
                return Ok(Consistency {
                    holds: false,
                    witness: Some((
                        p.label(a).to_string(),
                        p.label(b).to_string(),
                        p.label(c).to_string(),
                    )),
                });
            }
        }
    }
    Ok(Consistency { holds: true, witness: None })
}

#[derive(Debug, Clone)]
pub struct LminReport {
    /// probs[k-1] = P[first marked value = k] under a uniform extension.
    pub probs: Vec<Rat>,
    /// Raw extension counts behind `probs`.
    pub counts: Vec<u64>,
    /// Smallest k in 2..=n-1 with probs[k]^2 < probs[k-1] * probs[k+1],
    /// reported 1-based.
    pub failure_k: Option<usize>,
}

/// Exact distribution of the first position at which a uniform random
/// linear extension hits the marked set.
pub fn lmin_distribution<S: AsRef<str>>(p: &Poset, marked: &[S], caps: &Caps) -> Result<LminReport> {
    if marked.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut mask = 0u64;
    for s in marked {
        mask |= 1 << p.index_of(s.as_ref())?;
    }
    let exts = linear_extensions(p, caps)?;
    let n = p.n();
    let mut counts = vec![0u64; n];
    for e in &exts {
        counts[e.lmin(mask) - 1] += 1;
    }
    let total = int(exts.len() as i64);
    let probs: Vec<Rat> = counts.iter().map(|&c| int(c as i64) / total.clone()).collect();
    let mut failure_k = None;
    for k in 2..n {
        // 1-based k checks probs[k-1]^2 >= probs[k-2] * probs[k].
        if probs[k - 1].clone() * probs[k - 1].clone()
            < probs[k - 2].clone() * probs[k].clone()
        {
            failure_k = Some(k);
            break;
        }
    }
    Ok(LminReport { probs, counts, failure_k })
}

/// Appends a chain of `below` fresh elements under everything and `above`
/// fresh elements over everything. Extension counts are preserved.
pub fn append_chains(p: &Poset, below: usize, above: usize) -> Result<Poset> {
    let mut elements: Vec<String> = p.labels().to_vec();
    let mut covers: Vec<(String, String)> = p
        .covers()
        .iter()
        .map(|&(a, b)| (p.label(a).to_string(), p.label(b).to_string()))
        .collect();
    let fresh = |tag: &str, i: usize| format!("_{tag}{i}");
    for i in 1..=below {
        elements.push(fresh("lo", i));
        if i > 1 {
            // _lo(i) sits under _lo(i-1): _lo(below) is the global minimum.
            covers.push((fresh("lo", i), fresh("lo", i - 1)));
        }
    }
    for i in 1..=above {
        elements.push(fresh("hi", i));
        if i > 1 {
            covers.push((fresh("hi", i - 1), fresh("hi", i)));
        }
    }
    if below > 0 {
        for &m in &p.minimals() {
            covers.push((fresh("lo", 1), p.label(m).to_string()));
        }
    }
    if above > 0 {
        for &m in &p.maximals() {
            covers.push((p.label(m).to_string(), fresh("hi", 1)));
        }
    }
    build_poset(&elements, &covers)
}

/// Random order-reversing weights: psi(e) is a product of factors >= 1 over
/// the up-set of e, so i <= j forces psi(i) >= psi(j).
pub fn random_order_reversing<R: Rng>(p: &Poset, rng: &mut R) -> ElementWeights {
    let choices = [int(1), rat(3, 2), int(2), rat(5, 2), int(3)];
    let q: Vec<Rat> = (0..p.n()).map(|_| choices[rng.gen_range(0..choices.len())].clone()).collect();
    let mut out = ElementWeights::new();
    for e in 0..p.n() {
        let mut acc = int(1);
        for f in 0..p.n() {
            if p.le(e, f) {
                acc *= q[f].clone();
            }
        }
        out.insert(p.label(e).to_string(), acc);
    }
    out
}
