//! The down-up walk on facets: exact heat-bath sampling, spectral-gap and
//! mixing-time diagnostics, variance decompositions, and the slow-mixing
//! family that shows the gap bound is tight up to the dependence on d.
//!
//! All transition probabilities are exact rationals. Eigenvalues go through
//! the same symmetrized float solve used for link walks; total-variation
//! curves are iterated with a scaled-integer scheme so the mixing time
//! comparison against the threshold is an exact integer comparison.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::complex::PathComplex;
use crate::error::{Error, Result};
use crate::rat::{int, rat, to_f64, Rat};

/// Default facet-count cap for dense spectral work on the walk.
pub const GAP_CAP: usize = 2000;
/// Default facet-count cap for exact total-variation iteration.
pub const TV_CAP: usize = 500;

// ------------------------------------------------------------- resampling

/// One heat-bath class: the facets that agree outside a fixed position,
/// with integer weights over a class-wide common denominator.
#[derive(Debug, Clone)]
struct Group {
    members: Vec<usize>,
    /// Cumulative integer weights aligned with `members`; last entry is the
    /// class total.
    cum: Vec<BigUint>,
}

/// Index of heat-bath classes: for every position i, facets are grouped by
/// the face obtained by forgetting coordinate i.
#[derive(Debug)]
pub struct ResampleIndex {
    d: usize,
    groups: Vec<Group>,
    /// group id by (facet, position), row-major facet-first.
    of: Vec<usize>,
}

impl ResampleIndex {
    pub fn new(cx: &PathComplex) -> Result<ResampleIndex> {
        let d = cx.d();
        let n = cx.facets().len();
        let mut groups: Vec<Group> = Vec::new();
        let mut of = vec![usize::MAX; n * d];
        for pos in 0..d {
            let mut by_rest: HashMap<u128, Vec<usize>> = HashMap::new();
            for (t, f) in cx.facets().iter().enumerate() {
                let rest = f.mask & !(1u128 << f.verts[pos]);
                by_rest.entry(rest).or_default().push(t);
            }
            let mut keys: Vec<u128> = by_rest.keys().copied().collect();
            keys.sort_unstable();
            for key in keys {
                let members = by_rest.remove(&key).expect("key listed");
                // common denominator for exact integer sampling weights
                let mut lcm = BigInt::one();
                for &t in &members {
                    lcm = lcm.lcm(cx.facets()[t].weight.denom());
                }
                let mut cum = Vec::with_capacity(members.len());
                let mut acc = BigUint::zero();
                for &t in &members {
                    let w = &cx.facets()[t].weight;
                    let scaled = (w.numer() * (&lcm / w.denom())).magnitude().clone();
                    acc += scaled;
                    cum.push(acc.clone());
                }
                let gid = groups.len();
                for &t in &members {
                    of[t * d + pos] = gid;
                }
                groups.push(Group { members, cum });
            }
        }
        Ok(ResampleIndex { d, groups, of })
    }

    fn group(&self, facet: usize, pos: usize) -> &Group {
        &self.groups[self.of[facet * self.d + pos]]
    }
}

// ------------------------------------------------------------ chain state

/// A single walk trajectory; the generator is counter-based, so a seed plus
/// a stream id pins the whole trajectory.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub current: usize,
    pub steps: u64,
    pub seed: u64,
    pub stream: u64,
    rng: ChaCha8Rng,
}

impl ChainState {
    pub fn new(start: usize, seed: u64, stream: u64) -> ChainState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        ChainState { current: start, steps: 0, seed, stream, rng }
    }

    /// The chain's own random stream, e.g. for drawing a random start.
    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// The down-up walk: drop a uniformly random coordinate, then resample it
/// from the exact conditional distribution given the rest.
#[derive(Debug)]
pub struct DownUpWalk<'a> {
    cx: &'a PathComplex,
    idx: ResampleIndex,
}

impl<'a> DownUpWalk<'a> {
    pub fn new(cx: &'a PathComplex) -> Result<DownUpWalk<'a>> {
        Ok(DownUpWalk { cx, idx: ResampleIndex::new(cx)? })
    }

    pub fn complex(&self) -> &PathComplex {
        self.cx
    }

    /// One heat-bath step; returns the new facet id.
    pub fn step(&self, st: &mut ChainState) -> usize {
        let pos = st.rng.gen_range(0..self.idx.d);
        let g = self.idx.group(st.current, pos);
        let total = g.cum.last().expect("nonempty class");
        let r = st.rng.gen_biguint_below(total);
        // first index with cum > r
        let k = g.cum.partition_point(|c| *c <= r);
        st.current = g.members[k];
        st.steps += 1;
        st.current
    }

    pub fn run(&self, st: &mut ChainState, steps: u64) -> usize {
        for _ in 0..steps {
            self.step(st);
        }
        st.current
    }
}

// ---------------------------------------------------------- exact matrix

/// Exact transition matrix of the down-up walk on facets:
/// P(t,t') = (1/d) sum over positions i of mu(t') / mu(class of t off i),
/// where t' ranges over the class of t off i.
pub fn downup_matrix(cx: &PathComplex) -> Result<Vec<Vec<Rat>>> {
    let n = cx.facets().len();
    let d = cx.d();
    let idx = ResampleIndex::new(cx)?;
    let mut p = vec![vec![int(0); n]; n];
    let dd = int(d as i64);
    for t in 0..n {
        for pos in 0..d {
            let g = idx.group(t, pos);
            let total: Rat = g.members.iter().map(|&u| cx.facets()[u].weight.clone()).sum();
            for &u in &g.members {
                p[t][u] += cx.facets()[u].weight.clone() / (total.clone() * dd.clone());
            }
        }
    }
    Ok(p)
}

/// Spectral diagnostics of the exact walk.
#[derive(Debug, Clone)]
pub struct GapReport {
    pub n_facets: usize,
    pub d: usize,
    /// 1 - lambda2; by convention 1 for a single-facet walk.
    pub gap: f64,
    pub lambda2: Option<f64>,
    /// Guaranteed lower bound 4/(d(d+1)^2) for certified instances.
    pub bound: f64,
    pub degenerate: bool,
    /// Exact detailed balance mu(t) P(t,u) = mu(u) P(u,t).
    pub reversible: bool,
    /// Smallest eigenvalue; the walk is positive semidefinite.
    pub lambda_min: f64,
}

pub fn gap_lower_bound(d: usize) -> f64 {
    4.0 / (d as f64 * (d as f64 + 1.0) * (d as f64 + 1.0))
}

/// Exact-arithmetic walk matrix, exact reversibility check, then a dense
/// symmetrized eigensolve for the gap. Errs when the facet count exceeds
/// `cap`.
pub fn exact_downup_gap(cx: &PathComplex, cap: usize) -> Result<GapReport> {
    let n = cx.facets().len();
    let d = cx.d();
    if n > cap {
        return Err(Error::SizeLimitExceeded(format!("{n} facets exceeds cap {cap}")));
    }
    let p = downup_matrix(cx)?;
    let mut reversible = true;
    'outer: for t in 0..n {
        for u in (t + 1)..n {
            let lhs = cx.facets()[t].weight.clone() * p[t][u].clone();
            let rhs = cx.facets()[u].weight.clone() * p[u][t].clone();
            if lhs != rhs {
                reversible = false;
                break 'outer;
            }
        }
    }
    if n == 1 {
        return Ok(GapReport {
            n_facets: 1,
            d,
            gap: 1.0,
            lambda2: None,
            bound: gap_lower_bound(d),
            degenerate: true,
            reversible,
            lambda_min: 1.0,
        });
    }
    // symmetrize: S = D^{1/2} P D^{-1/2} with D = diag(mu)
    let root: Vec<f64> = cx.facets().iter().map(|f| to_f64(&f.weight).sqrt()).collect();
    let mut s = nalgebra::DMatrix::<f64>::zeros(n, n);
    for t in 0..n {
        for u in 0..n {
            let v = (to_f64(&p[t][u]) * root[t] / root[u] + to_f64(&p[u][t]) * root[u] / root[t]) / 2.0;
            s[(t, u)] = v;
            s[(u, t)] = v;
        }
    }
    let mut eig: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let lambda2 = eig[1];
    Ok(GapReport {
        n_facets: n,
        d,
        gap: 1.0 - lambda2,
        lambda2: Some(lambda2),
        bound: gap_lower_bound(d),
        degenerate: false,
        reversible,
        lambda_min: *eig.last().expect("nonempty spectrum"),
    })
}

// ------------------------------------------------------------- tv mixing

/// A mixing run: the first time total variation from stationarity drops to
/// `eps`, against the threshold (d(d+1)^2/4) log(1/(eps mu(start))).
#[derive(Debug, Clone)]
pub struct MixingReport {
    /// Start facet; `None` for the uniform initial distribution over
    /// facets, whose bound uses the smallest stationary weight.
    pub start: Option<usize>,
    pub start_label: Vec<String>,
    pub eps: f64,
    /// First t with TV(t) <= eps; None if not reached by the cutoff.
    pub t_measured: Option<u64>,
    pub t_bound: f64,
    /// (t, TV(t)) samples, t = 0, 1, 2, ...
    pub curve: Vec<(u64, f64)>,
    pub mode: &'static str,
    pub seed: Option<u64>,
    pub chains: Option<usize>,
}

/// Facet of maximum stationary weight, smallest index on ties.
pub fn max_weight_facet(cx: &PathComplex) -> usize {
    let mut best = 0usize;
    for (t, f) in cx.facets().iter().enumerate() {
        if f.weight > cx.facets()[best].weight {
            best = t;
        }
    }
    best
}

pub fn mixing_time_bound(d: usize, eps: f64, mu_start: f64) -> f64 {
    (d as f64 * (d as f64 + 1.0) * (d as f64 + 1.0) / 4.0) * (1.0 / (eps * mu_start)).ln()
}

fn big_ratio_f64(n: &BigUint, d: &BigUint) -> f64 {
    // float of n/d without reduction: shift both under 64 bits
    let shift = n.bits().max(d.bits()).saturating_sub(53);
    let nn = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    let dd = (d >> shift).to_f64().unwrap_or(f64::INFINITY);
    if dd == 0.0 {
        f64::INFINITY
    } else {
        nn / dd
    }
}

/// Exact distribution iteration from a point start. The distribution is a
/// shared-denominator integer vector, so comparing TV(t) with eps is an
/// exact integer comparison; curve floats are for reporting only.
///
/// Stops at the first t with TV <= eps, or at `cutoff` steps.
pub fn tv_mixing_exact(
    cx: &PathComplex,
    start: usize,
    eps: &Rat,
    cap: usize,
    cutoff: u64,
) -> Result<MixingReport> {
    tv_mixing_exact_impl(cx, Some(start), eps, cap, cutoff)
}

/// Exact TV trajectory from the uniform initial distribution over
/// facets. The threshold bound uses the smallest stationary weight,
/// which dominates every point start in the support.
pub fn tv_mixing_exact_uniform(
    cx: &PathComplex,
    eps: &Rat,
    cap: usize,
    cutoff: u64,
) -> Result<MixingReport> {
    tv_mixing_exact_impl(cx, None, eps, cap, cutoff)
}

fn tv_mixing_exact_impl(
    cx: &PathComplex,
    start: Option<usize>,
    eps: &Rat,
    cap: usize,
    cutoff: u64,
) -> Result<MixingReport> {
    let n = cx.facets().len();
    if n > cap {
        return Err(Error::SizeLimitExceeded(format!("{n} facets exceeds cap {cap}")));
    }
    if let Some(s) = start {
        if s >= n {
            return Err(Error::IndexOutOfRange(format!("start facet {s}")));
        }
    }
    if *eps <= int(0) || *eps >= int(1) {
        return Err(Error::DomainError(format!("eps {eps} outside (0,1)")));
    }
    let p = downup_matrix(cx)?;
    // scale the matrix to integers: L = lcm of all entry denominators
    let mut l = BigInt::one();
    for row in &p {
        for e in row {
            if !e.is_zero() {
                l = l.lcm(e.denom());
            }
        }
    }
    let m: Vec<Vec<BigUint>> = p
        .iter()
        .map(|row| row.iter().map(|e| (e.numer() * (&l / e.denom())).magnitude().clone()).collect())
        .collect();
    let l = l.magnitude().clone();
    // stationary weights over one shared denominator
    let mut mu_den = BigInt::one();
    for f in cx.facets() {
        mu_den = mu_den.lcm(f.weight.denom());
    }
    let mu_num: Vec<BigUint> = cx
        .facets()
        .iter()
        .map(|f| (f.weight.numer() * (&mu_den / f.weight.denom())).magnitude().clone())
        .collect();
    let mu_den = mu_den.magnitude().clone();

    let mut v: Vec<BigUint> = vec![BigUint::zero(); n];
    let mut z = BigUint::one();
    match start {
        Some(s) => v[s] = BigUint::one(),
        None => {
            v.iter_mut().for_each(|e| *e = BigUint::one());
            z = BigUint::from(n);
        }
    }
    let (e_num, e_den) =
        (eps.numer().magnitude().clone(), eps.denom().magnitude().clone());

    let mut curve = Vec::new();
    let mut t_measured = None;
    for t in 0..=cutoff {
        // TV = sum |v/z - mu| / 2 ; scaled: sum |v mu_den - mu_num z| <= 2 eps z mu_den
        let mut dist = BigUint::zero();
        for (vt, nt) in v.iter().zip(mu_num.iter()) {
            let a = vt * &mu_den;
            let b = nt * &z;
            dist += if a >= b { a - b } else { b - a };
        }
        let denom = &z * &mu_den * 2u32;
        curve.push((t, big_ratio_f64(&dist, &denom)));
        if &dist * &e_den <= &denom * &e_num {
            t_measured = Some(t);
            break;
        }
        if t == cutoff {
            break;
        }
        let mut next = vec![BigUint::zero(); n];
        for (x, vx) in v.iter().enumerate() {
            if vx.is_zero() {
                continue;
            }
            for (y, cell) in m[x].iter().enumerate() {
                if !cell.is_zero() {
                    next[y] += vx * cell;
                }
            }
        }
        v = next;
        z *= &l;
    }
    let (mu0, start_label) = match start {
        Some(s) => (
            to_f64(&cx.facets()[s].weight),
            cx.face_labels(cx.facets()[s].mask),
        ),
        None => (
            cx.facets().iter().map(|f| to_f64(&f.weight)).fold(f64::MAX, f64::min),
            Vec::new(),
        ),
    };
    Ok(MixingReport {
        start,
        start_label,
        eps: to_f64(eps),
        t_measured,
        t_bound: mixing_time_bound(cx.d(), to_f64(eps), mu0),
        curve,
        mode: "exact",
        seed: None,
        chains: None,
    })
}

/// Plug-in TV estimate from independent chains (one stream per chain).
/// The histogram is compared against the exact stationary weights at every
/// step; `chains` should be at least 100 for the estimate to mean much.
pub fn tv_mixing_empirical(
    cx: &PathComplex,
    start: usize,
    eps: f64,
    chains: usize,
    cutoff: u64,
    seed: u64,
) -> Result<MixingReport> {
    tv_mixing_empirical_impl(cx, Some(start), eps, chains, cutoff, seed)
}

/// Plug-in TV estimate with every chain started at its own uniformly
/// random facet (drawn from the chain's stream).
pub fn tv_mixing_empirical_uniform(
    cx: &PathComplex,
    eps: f64,
    chains: usize,
    cutoff: u64,
    seed: u64,
) -> Result<MixingReport> {
    tv_mixing_empirical_impl(cx, None, eps, chains, cutoff, seed)
}

fn tv_mixing_empirical_impl(
    cx: &PathComplex,
    start: Option<usize>,
    eps: f64,
    chains: usize,
    cutoff: u64,
    seed: u64,
) -> Result<MixingReport> {
    let n = cx.facets().len();
    if let Some(s) = start {
        if s >= n {
            return Err(Error::IndexOutOfRange(format!("start facet {s}")));
        }
    }
    if chains == 0 {
        return Err(Error::DomainError("need at least one chain".into()));
    }
    let walk = DownUpWalk::new(cx)?;
    let mut states: Vec<ChainState> = (0..chains)
        .map(|c| {
            let mut st = ChainState::new(start.unwrap_or(0), seed, c as u64);
            if start.is_none() {
                st.current = st.rng_mut().gen_range(0..n);
            }
            st
        })
        .collect();
    let mu: Vec<f64> = cx.facets().iter().map(|f| to_f64(&f.weight)).collect();
    let mut curve = Vec::new();
    let mut t_measured = None;
    for t in 0..=cutoff {
        let mut hist = vec![0u64; n];
        for st in &states {
            hist[st.current] += 1;
        }
        let tv: f64 = hist
            .iter()
            .zip(mu.iter())
            .map(|(&h, &m)| (h as f64 / chains as f64 - m).abs())
            .sum::<f64>()
            / 2.0;
        curve.push((t, tv));
        if tv <= eps {
            t_measured = Some(t);
            break;
        }
        if t == cutoff {
            break;
        }
        for st in states.iter_mut() {
            walk.step(st);
        }
    }
    let (mu0, start_label) = match start {
        Some(s) => (
            to_f64(&cx.facets()[s].weight),
            cx.face_labels(cx.facets()[s].mask),
        ),
        None => (
            cx.facets().iter().map(|f| to_f64(&f.weight)).fold(f64::MAX, f64::min),
            Vec::new(),
        ),
    };
    Ok(MixingReport {
        start,
        start_label,
        eps,
        t_measured,
        t_bound: mixing_time_bound(cx.d(), eps, mu0),
        curve,
        mode: "empirical",
        seed: Some(seed),
        chains: Some(chains),
    })
}

// --------------------------------------------------- variance decompositions

/// Exact variance decompositions for random test functions:
/// coordinate-wise with weights i(d+1-i), single-coordinate with the
/// certified local-expansion factor, and product factorization of the
/// single-coordinate conditionals.
#[derive(Debug, Clone)]
pub struct VarianceReport {
    pub trials: usize,
    pub d: usize,
    pub seed: u64,
    /// Local-expansion bound fed to the single-coordinate inequality.
    pub alpha: Rat,
    pub coordinate_ok: bool,
    pub single_ok: bool,
    pub factorization_ok: bool,
    /// Worst (smallest) slack RHS - LHS seen per inequality.
    pub coordinate_slack: Rat,
    pub single_slack: Rat,
    pub factorization_slack: Rat,
}

fn variance(weights: &[(Rat, Rat)]) -> Rat {
    // weights: (probability, value) pairs with probabilities summing to 1
    let mean: Rat = weights.iter().map(|(p, x)| p.clone() * x.clone()).sum();
    weights.iter().map(|(p, x)| p.clone() * (x.clone() - mean.clone()) * (x.clone() - mean.clone())).sum()
}

/// Verifies, exactly and per trial:
///   Var(f) <= sum_i i(d+1-i) E_{rest} Var(f | all coordinates but i),
///   Var(f) <= d/(d-1) * 1/(1-alpha) * E_i E_F Var(f | coordinate i = F),
/// and the product-factorization inequality for every single-coordinate
/// conditional. Requires a connected complex (the inequalities assume a
/// certified expander) and d >= 2 for the single-coordinate form.
pub fn variance_decomposition_check(
    cx: &PathComplex,
    trials: usize,
    seed: u64,
    alpha: &Rat,
) -> Result<VarianceReport> {
    let n = cx.facets().len();
    let d = cx.d();
    if !cx.check_connected()? {
        return Err(Error::NotCertified("variance decompositions need a connected complex".into()));
    }
    if *alpha < int(0) || *alpha >= int(1) {
        return Err(Error::DomainError(format!("alpha {alpha} outside [0,1)")));
    }
    if d < 2 {
        return Err(Error::DomainError("variance decompositions need d >= 2".into()));
    }
    let idx = ResampleIndex::new(cx)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coordinate_ok = true;
    let mut single_ok = true;
    let mut factorization_ok = true;
    let mut c_slack: Option<Rat> = None;
    let mut s_slack: Option<Rat> = None;
    let mut f_slack: Option<Rat> = None;
    let tighten = |slot: &mut Option<Rat>, v: Rat| {
        if slot.as_ref().map_or(true, |b| v < *b) {
            *slot = Some(v);
        }
    };

    // trial 0 is the constant function; the rest are random rationals
    for trial in 0..trials.max(1) {
        let f: Vec<Rat> = if trial == 0 {
            vec![int(1); n]
        } else {
            (0..n)
                .map(|_| rat(rng.gen_range(-99..=99), rng.gen_range(1..=9)))
                .collect()
        };
        let var_full = variance(
            &cx.facets().iter().enumerate().map(|(t, fc)| (fc.weight.clone(), f[t].clone())).collect::<Vec<_>>(),
        );

        // coordinate-wise: classes that agree off position i
        let mut rhs_c = int(0);
        for pos in 0..d {
            let coeff = int(((pos + 1) * (d - pos)) as i64);
            let mut seen = vec![false; n];
            let mut inner = int(0);
            for t in 0..n {
                if seen[t] {
                    continue;
                }
                let g = idx.group(t, pos);
                for &u in &g.members {
                    seen[u] = true;
                }
                let total: Rat = g.members.iter().map(|&u| cx.facets()[u].weight.clone()).sum();
                let cond: Vec<(Rat, Rat)> = g
                    .members
                    .iter()
                    .map(|&u| (cx.facets()[u].weight.clone() / total.clone(), f[u].clone()))
                    .collect();
                inner += total * variance(&cond);
            }
            rhs_c += coeff * inner;
        }
        if rhs_c < var_full {
            coordinate_ok = false;
        }
        tighten(&mut c_slack, rhs_c - var_full.clone());

        // single-coordinate: condition on sigma_pos = v
        let mut ee = int(0);
        let mut fact_holds = true;
        let mut fact_margin: Option<Rat> = None;
        for pos in 0..d {
            let mut by_vert: HashMap<u32, Vec<usize>> = HashMap::new();
            for (t, fc) in cx.facets().iter().enumerate() {
                by_vert.entry(fc.verts[pos]).or_default().push(t);
            }
            let mut verts: Vec<u32> = by_vert.keys().copied().collect();
            verts.sort_unstable();
            for vtx in verts {
                let ts = &by_vert[&vtx];
                let total: Rat = ts.iter().map(|&t| cx.facets()[t].weight.clone()).sum();
                let cond: Vec<(Rat, Rat)> = ts
                    .iter()
                    .map(|&t| (cx.facets()[t].weight.clone() / total.clone(), f[t].clone()))
                    .collect();
                let var_cond = variance(&cond);
                ee += total.clone() * var_cond.clone();

                // product factorization of the conditional over low/high blocks
                let low_key = |t: usize| -> Vec<u32> { cx.facets()[t].verts[..pos].to_vec() };
                let high_key = |t: usize| -> Vec<u32> { cx.facets()[t].verts[pos + 1..].to_vec() };
                let mut nu1: HashMap<Vec<u32>, Rat> = HashMap::new();
                let mut nu2: HashMap<Vec<u32>, Rat> = HashMap::new();
                for &t in ts {
                    let w = cx.facets()[t].weight.clone() / total.clone();
                    *nu1.entry(low_key(t)).or_insert_with(|| int(0)) += w.clone();
                    *nu2.entry(high_key(t)).or_insert_with(|| int(0)) += w;
                }
                // conditional independence: weight factorizes through the blocks
                for &t in ts {
                    let w = cx.facets()[t].weight.clone() / total.clone();
                    if w != nu1[&low_key(t)].clone() * nu2[&high_key(t)].clone() {
                        fact_holds = false;
                    }
                }
                // E_{low} Var(f | low fixed) + E_{high} Var(f | high fixed)
                let mut rhs_f = int(0);
                for (key, p1) in &nu1 {
                    let sub: Vec<(Rat, Rat)> = ts
                        .iter()
                        .filter(|&&t| low_key(t) == *key)
                        .map(|&t| {
                            (nu2[&high_key(t)].clone(), f[t].clone())
                        })
                        .collect();
                    rhs_f += p1.clone() * variance(&sub);
                }
                for (key, p2) in &nu2 {
                    let sub: Vec<(Rat, Rat)> = ts
                        .iter()
                        .filter(|&&t| high_key(t) == *key)
                        .map(|&t| {
                            (nu1[&low_key(t)].clone(), f[t].clone())
                        })
                        .collect();
                    rhs_f += p2.clone() * variance(&sub);
                }
                if rhs_f < var_cond {
                    fact_holds = false;
                }
                let m = rhs_f - var_cond;
                if fact_margin.as_ref().map_or(true, |b| m < *b) {
                    fact_margin = Some(m);
                }
            }
        }
        let ee = ee / int(d as i64);
        let factor = rat(d as i64, (d - 1) as i64) / (int(1) - alpha.clone());
        let rhs_s = factor * ee;
        if rhs_s < var_full {
            single_ok = false;
        }
        tighten(&mut s_slack, rhs_s - var_full);
        if !fact_holds {
            factorization_ok = false;
        }
        tighten(&mut f_slack, fact_margin.unwrap_or_else(|| int(0)));
    }

    Ok(VarianceReport {
        trials: trials.max(1),
        d,
        seed,
        alpha: alpha.clone(),
        coordinate_ok,
        single_ok,
        factorization_ok,
        coordinate_slack: c_slack.unwrap_or_else(|| int(0)),
        single_slack: s_slack.unwrap_or_else(|| int(0)),
        factorization_slack: f_slack.unwrap_or_else(|| int(0)),
    })
}

// ----------------------------------------------------- slow-mixing family

/// The even-dimensional family whose empty-link expansion degrades linearly
/// in 1/d: a chain of d elements plus one free element, vertex weights 1 or
/// 1+eps arranged to pile mass on the two extreme linear extensions.
#[derive(Debug, Clone)]
pub struct LowerBound {
    pub cx: PathComplex,
    pub d: usize,
    pub eps: Rat,
    /// Canonical worst codimension-2 face (two middle coordinates open).
    pub worst_face: u128,
    /// Max lambda2 over all codimension-2 links (float solve).
    pub worst_lambda2: f64,
    /// Exact square of lambda2 on the canonical face.
    pub worst_lambda2_sq: Rat,
    /// Target value (1+eps)/(2+eps); its square equals `worst_lambda2_sq`.
    pub target: Rat,
    /// Exact conductance of the cut S = chain-only vertices in the empty link.
    pub phi_s: Rat,
    /// Nominal threshold 2/(eps(1+eps)d). For large eps the cut genuinely
    /// exceeds it; see `phi_bound_safe` for the constant the geometric-sum
    /// estimate actually proves.
    pub phi_bound: Rat,
    /// Provable threshold 2/(eps d); holds for every even d and eps > 0.
    pub phi_bound_safe: Rat,
    pub vol_balanced: bool,
    pub lambda2_empty: f64,
    /// Nominal eigenvalue floor 1 - 4/(eps(1+eps)d); fails where `phi_bound`
    /// fails.
    pub eig_lower: f64,
    /// Provable floor 1 - 4/(eps d) via the exact cut and the spectral
    /// sandwich lambda2 >= 1 - 2 phi(S).
    pub eig_lower_safe: f64,
    /// Exact sides of the geometric-sum estimate:
    /// lhs = sum_i min{i,d-i}(1+eps)^{|d/2-i|}, rhs the nominal
    /// (2/eps) sum_{i=1}^{d/2} (1+eps)^{d/2-i}, and rhs_safe = (1+eps) rhs,
    /// which is the side the term-by-term expansion actually yields.
    pub fact_lhs: Rat,
    pub fact_rhs: Rat,
    pub fact_rhs_safe: Rat,
    pub verified_path: bool,
}

/// Builds the slow-mixing instance for even d >= 2 and eps > 0.
pub fn lowerbound_instance(d: usize, eps: &Rat) -> Result<LowerBound> {
    if d < 2 || d % 2 != 0 {
        return Err(Error::OddDimension(d));
    }
    if *eps <= int(0) {
        return Err(Error::DomainError(format!("eps {eps} must be positive")));
    }
    let labels: Vec<String> = (1..=d + 1).map(|i| i.to_string()).collect();
    let covers: Vec<(String, String)> =
        (2..=d).map(|i| (i.to_string(), (i + 1).to_string())).collect();
    let p = crate::order::build_poset(&labels, &covers)?;
    let caps = crate::order::Caps::default();
    let lat = crate::order::birkhoff_lattice(&p, &caps)?;
    // free element 1 is poset index 0, so G-flats are exactly those with bit 0
    let one_bit = 1u64 << p.index_of("1")?;
    let wplus = int(1) + eps.clone();
    let mut flat_weights = vec![int(1); lat.len()];
    for i in 0..lat.len() {
        let r = lat.rank_of(i);
        if r == 0 || r == d + 1 {
            continue;
        }
        let has_one = lat.flat(i) & one_bit != 0;
        let heavy = if has_one { r <= d / 2 } else { r > d / 2 };
        if heavy {
            flat_weights[i] = wplus.clone();
        }
    }
    let cx = crate::complex::chain_complex(&lat, Some(&flat_weights))?;
    let verified_path = cx.verify_path_complex(false)?.pass;

    // canonical worst face: F_1..F_{d/2-1} and G_{d/2+2}..G_d
    let h = d / 2;
    let mut face_labs: Vec<String> = Vec::new();
    let flat_name = |mask: u64| -> String {
        let mut elems: Vec<&str> = (0..p.n()).filter(|&e| mask & (1 << e) != 0).map(|e| p.label(e)).collect();
        elems.sort_by_key(|s| s.parse::<usize>().unwrap_or(0));
        format!("{{{}}}", elems.join(","))
    };
    for i in 1..h {
        // F_i = {2..i+1}
        let mut mask = 0u64;
        for e in 2..=i + 1 {
            mask |= 1 << p.index_of(&e.to_string())?;
        }
        face_labs.push(flat_name(mask));
    }
    for i in h + 2..=d {
        // G_i = {1..i}
        let mut mask = 0u64;
        for e in 1..=i {
            mask |= 1 << p.index_of(&e.to_string())?;
        }
        face_labs.push(flat_name(mask));
    }
    let face_strs: Vec<&str> = face_labs.iter().map(|s| s.as_str()).collect();
    let worst_face = cx.face_from_labels(&face_strs)?;

    // worst codim-2 link over all faces
    let mut seen: HashMap<u128, ()> = HashMap::new();
    let mut worst_lambda2 = f64::NEG_INFINITY;
    for f in cx.facets() {
        let vs = &f.verts;
        for a in 0..vs.len() {
            for b in (a + 1)..vs.len() {
                let face = f.mask & !(1u128 << vs[a]) & !(1u128 << vs[b]);
                if seen.insert(face, ()).is_some() {
                    continue;
                }
                let w = crate::spectral::walk_matrix(&cx, face)?;
                worst_lambda2 = worst_lambda2.max(w.lambda2()?);
            }
        }
    }
    let wm = crate::spectral::walk_matrix(&cx, worst_face)?;
    let worst_lambda2_sq = wm.two_by_two_square()?;
    let target = wplus.clone() / (int(2) + eps.clone());

    // cut S = chain-only vertices in the empty-link walk
    let w0 = crate::spectral::walk_matrix(&cx, 0)?;
    let mut s_idx = Vec::new();
    for (i, lab) in w0.labels.iter().enumerate() {
        let v = cx.vertex_by_label(lab)?;
        let flat = cx.flat_of(v).ok_or_else(|| Error::DomainError("lattice complex expected".into()))?;
        if flat & one_bit == 0 {
            s_idx.push(i);
        }
    }
    let cut = crate::spectral::conductance_cheeger(&w0, &s_idx, false)?;
    let total_vol: Rat = w0.deg.iter().cloned().sum();
    let vol_balanced = cut.vol_s.clone() * int(2) == total_vol;
    let phi_bound = int(2) / (eps.clone() * wplus.clone() * int(d as i64));
    let phi_bound_safe = int(2) / (eps.clone() * int(d as i64));

    // geometric-sum estimate: sum min(i,d-i) (1+eps)^{|d/2-i|} <= (2/eps) sum_{i=1}^{d/2} (1+eps)^{d/2-i}
    let pow = |k: usize| -> Rat {
        let mut r = int(1);
        for _ in 0..k {
            r *= wplus.clone();
        }
        r
    };
    let mut fact_lhs = int(0);
    for i in 0..=d {
        let m = i.min(d - i);
        fact_lhs += int(m as i64) * pow(h.abs_diff(i));
    }
    let mut fact_rhs = int(0);
    for i in 1..=h {
        fact_rhs += pow(h - i);
    }
    fact_rhs = fact_rhs * int(2) / eps.clone();
    let fact_rhs_safe = fact_rhs.clone() * wplus.clone();

    Ok(LowerBound {
        d,
        eps: eps.clone(),
        worst_face,
        worst_lambda2,
        worst_lambda2_sq,
        target,
        phi_s: cut.phi_s,
        phi_bound,
        phi_bound_safe,
        vol_balanced,
        lambda2_empty: cut.lambda2,
        eig_lower: 1.0 - 4.0 / (to_f64(eps) * to_f64(&wplus) * d as f64),
        eig_lower_safe: 1.0 - 4.0 / (to_f64(eps) * d as f64),
        fact_lhs,
        fact_rhs,
        fact_rhs_safe,
        verified_path,
        cx,
    })
}

// ----------------------------------------------------------------- tests

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::EIG_TOL;
    use crate::complex::PathComplex;
    use crate::rat::rat;

    fn four_facet() -> PathComplex {
        // b < c < d with a free: the four linear extensions, uniform
        let p = crate::order::build_poset(&["a", "b", "c", "d"], &[("b", "c"), ("c", "d")]).unwrap();
        let caps = crate::order::Caps::default();
        let lat = crate::order::birkhoff_lattice(&p, &caps).unwrap();
        crate::complex::chain_complex(&lat, None).unwrap()
    }

    #[test]
    fn rows_are_stochastic_and_reversible() {
        let cx = four_facet();
        let p = downup_matrix(&cx).unwrap();
        for row in &p {
            let s: Rat = row.iter().cloned().sum();
            assert_eq!(s, int(1), "rows must sum to one");
        }
        let rep = exact_downup_gap(&cx, GAP_CAP).unwrap();
        assert!(rep.reversible);
        assert!(!rep.degenerate);
        assert!(rep.gap >= rep.bound - EIG_TOL, "gap {} under bound {}", rep.gap, rep.bound);
        assert!(rep.lambda_min >= -EIG_TOL, "walk must be PSD");
    }

    #[test]
    fn single_facet_is_degenerate() {
        let p = crate::order::build_poset(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let caps = crate::order::Caps::default();
        let lat = crate::order::birkhoff_lattice(&p, &caps).unwrap();
        let cx = crate::complex::chain_complex(&lat, None).unwrap();
        assert_eq!(cx.facets().len(), 1);
        let rep = exact_downup_gap(&cx, GAP_CAP).unwrap();
        assert!(rep.degenerate);
        assert_eq!(rep.gap, 1.0);
        let mix = tv_mixing_exact(&cx, 0, &rat(1, 100), TV_CAP, 10).unwrap();
        assert_eq!(mix.t_measured, Some(0), "a point mass is already stationary");
    }

    #[test]
    fn max_weight_facet_picks_the_heaviest() {
        let lb = lowerbound_instance(4, &int(1)).unwrap();
        let t = max_weight_facet(&lb.cx);
        let w = lb.cx.facets()[t].weight.clone();
        for f in lb.cx.facets() {
            assert!(f.weight <= w);
        }
        assert_eq!(w, rat(4, 13), "extreme extensions carry weight 4/(4+2+1+2+4)");
    }

    #[test]
    fn steps_stay_on_facets_and_are_reproducible() {
        let cx = four_facet();
        let walk = DownUpWalk::new(&cx).unwrap();
        let mut a = ChainState::new(0, 7, 0);
        let mut b = ChainState::new(0, 7, 0);
        for _ in 0..200 {
            let x = walk.step(&mut a);
            let y = walk.step(&mut b);
            assert_eq!(x, y, "same seed and stream must give the same path");
            assert!(x < cx.facets().len());
        }
        let mut c = ChainState::new(0, 7, 1);
        let path_a: Vec<usize> = (0..50).map(|_| walk.step(&mut a)).collect();
        let path_c: Vec<usize> = (0..50).map(|_| walk.step(&mut c)).collect();
        assert_ne!(path_a, path_c, "streams must decorrelate");
    }
}
