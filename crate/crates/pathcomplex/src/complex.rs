//! Weighted d-partite complexes: faces, links, external fields, marginals,
//! and exact verification of the conditional-independence (path) property.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::order::RankedLattice;
use crate::rat::{int, Rat};

/// A facet: one vertex per part, exact positive weight.
#[derive(Debug, Clone)]
pub struct Facet {
    pub verts: Vec<u32>,
    pub mask: u128,
    pub weight: Rat,
}

/// A part: its original 1-based type index and its vertex ids.
#[derive(Debug, Clone)]
pub struct PartInfo {
    pub index: usize,
    pub verts: Vec<u32>,
}

/// A pure d-partite weighted complex. Weights are normalized so the facet
/// weights sum to 1; every derived quantity is exact.
///
/// Links keep the original part indices of the parent, so positional
/// formulas that depend on absolute type indices stay well defined.
#[derive(Debug, Clone)]
pub struct PathComplex {
    parts: Vec<PartInfo>,
    vert_part: Vec<usize>,
    vert_label: Vec<String>,
    /// Underlying flat bitset for lattice-derived complexes.
    vert_flat: Vec<Option<u64>>,
    facets: Vec<Facet>,
}

pub fn mask_of(ids: &[u32]) -> u128 {
    ids.iter().fold(0u128, |m, &v| m | (1u128 << v))
}

pub fn ids_of(mask: u128) -> Vec<u32> {
    (0..128).filter(|&b| mask & (1u128 << b) != 0).collect()
}

impl PathComplex {
    /// Builds a complex from labelled parts and labelled facets; weights are
    /// normalized to total 1.
    pub fn new(
        parts: Vec<(usize, Vec<String>)>,
        facets: Vec<(Vec<String>, Rat)>,
    ) -> Result<PathComplex> {
        if parts.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut part_infos = Vec::new();
        let mut vert_part = Vec::new();
        let mut vert_label: Vec<String> = Vec::new();
        let mut by_label: HashMap<String, u32> = HashMap::new();
        for (pos, (index, labels)) in parts.iter().enumerate() {
            if labels.is_empty() {
                return Err(Error::EmptySet);
            }
            let mut ids = Vec::new();
            for lab in labels {
                if by_label.contains_key(lab) {
                    return Err(Error::DuplicateLabel(lab.clone()));
                }
                let id = vert_label.len() as u32;
                by_label.insert(lab.clone(), id);
                vert_label.push(lab.clone());
                vert_part.push(pos);
                ids.push(id);
            }
            part_infos.push(PartInfo { index: *index, verts: ids });
        }
        if vert_label.len() > 127 {
            return Err(Error::SizeLimitExceeded(format!(
                "{} vertices exceed the 127-vertex mask limit",
                vert_label.len()
            )));
        }
        let d = part_infos.len();
        let mut built: Vec<Facet> = Vec::new();
        let mut total = int(0);
        for (labels, w) in facets {
            if w <= int(0) {
                return Err(Error::NonpositiveWeight(format!("facet {labels:?}")));
            }
            if labels.len() != d {
                return Err(Error::Input(format!("facet {labels:?} must have {d} vertices")));
            }
            let mut ids = Vec::new();
            for lab in &labels {
                let &id = by_label
                    .get(lab)
                    .ok_or_else(|| Error::UnknownLabel(lab.clone()))?;
                ids.push(id);
            }
            ids.sort_unstable();
            let mut seen = vec![false; d];
            for &v in &ids {
                let p = vert_part[v as usize];
                if seen[p] {
                    return Err(Error::Input(format!("facet {labels:?} hits a part twice")));
                }
                seen[p] = true;
            }
            let mask = mask_of(&ids);
            if built.iter().any(|f| f.mask == mask) {
                return Err(Error::Input(format!("duplicate facet {labels:?}")));
            }
            total += w.clone();
            built.push(Facet { verts: ids, mask, weight: w });
        }
        if built.is_empty() {
            return Err(Error::EmptySet);
        }
        for v in 0..vert_label.len() as u32 {
            if !built.iter().any(|f| f.mask & (1u128 << v) != 0) {
                return Err(Error::IsolatedVertex(vert_label[v as usize].clone()));
            }
        }
        for f in &mut built {
            f.weight /= total.clone();
        }
        built.sort_by(|a, b| a.verts.cmp(&b.verts));
        let nv = vert_label.len();
        Ok(PathComplex {
            parts: part_infos,
            vert_part,
            vert_label,
            vert_flat: vec![None; nv],
            facets: built,
        })
    }

    /// Number of parts.
    pub fn d(&self) -> usize {
        self.parts.len()
    }

    pub fn nv(&self) -> usize {
        self.vert_label.len()
    }

    pub fn parts(&self) -> &[PartInfo] {
        &self.parts
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Part position (0-based) of a vertex.
    pub fn part_of(&self, v: u32) -> usize {
        self.vert_part[v as usize]
    }

    /// Original 1-based type index of a vertex's part.
    pub fn type_index(&self, v: u32) -> usize {
        self.parts[self.vert_part[v as usize]].index
    }

    pub fn label(&self, v: u32) -> &str {
        &self.vert_label[v as usize]
    }

    pub fn flat_of(&self, v: u32) -> Option<u64> {
        self.vert_flat[v as usize]
    }

    pub fn vertex_by_label(&self, lab: &str) -> Result<u32> {
        self.vert_label
            .iter()
            .position(|l| l == lab)
            .map(|i| i as u32)
            .ok_or_else(|| Error::UnknownLabel(lab.to_string()))
    }

    pub fn face_from_labels<S: AsRef<str>>(&self, labs: &[S]) -> Result<u128> {
        let mut ids = Vec::new();
        for l in labs {
            ids.push(self.vertex_by_label(l.as_ref())?);
        }
        let mask = mask_of(&ids);
        if !self.is_face(mask) {
            return Err(Error::NotAFace(format!(
                "{{{}}}",
                labs.iter().map(|l| l.as_ref()).collect::<Vec<_>>().join(",")
            )));
        }
        Ok(mask)
    }

    pub fn is_face(&self, mask: u128) -> bool {
        self.facets.iter().any(|f| mask & !f.mask == 0)
    }

    pub fn face_labels(&self, mask: u128) -> Vec<String> {
        ids_of(mask).into_iter().map(|v| self.vert_label[v as usize].clone()).collect()
    }

    /// Total weight of facets containing the face; facet weights sum to 1,
    /// so this is the face probability.
    pub fn face_prob(&self, mask: u128) -> Rat {
        let mut acc = int(0);
        for f in &self.facets {
            if mask & !f.mask == 0 {
                acc += f.weight.clone();
            }
        }
        acc
    }

    /// Enumerates every face with its probability and containing facets.
    pub fn face_index(&self) -> Result<FaceIndex> {
        let d = self.d();
        let budget: u64 = 50_000_000;
        if (self.facets.len() as u64) << d > budget {
            return Err(Error::ExponentialBlowup(format!(
                "{} facets in dimension {d}",
                self.facets.len()
            )));
        }
        let mut prob: HashMap<u128, Rat> = HashMap::new();
        let mut facets_of: HashMap<u128, Vec<u32>> = HashMap::new();
        for (fi, f) in self.facets.iter().enumerate() {
            // every subset of the facet's vertex set
            let k = f.verts.len();
            for sub in 0u32..(1 << k) {
                let mut mask = 0u128;
                for (b, &v) in f.verts.iter().enumerate() {
                    if sub & (1 << b) != 0 {
                        mask |= 1u128 << v;
                    }
                }
                *prob.entry(mask).or_insert_with(|| int(0)) += f.weight.clone();
                facets_of.entry(mask).or_default().push(fi as u32);
            }
        }
        Ok(FaceIndex { prob, facets_of })
    }

    /// The conditional complex on the parts not met by `face`.
    pub fn link(&self, face: u128) -> Result<PathComplex> {
        let ids = ids_of(face);
        let mut seen_parts = Vec::new();
        for &v in &ids {
            if v as usize >= self.nv() {
                return Err(Error::IndexOutOfRange(format!("vertex {v}")));
            }
            let p = self.vert_part[v as usize];
            if seen_parts.contains(&p) {
                return Err(Error::NotAFace("two vertices in one part".into()));
            }
            seen_parts.push(p);
        }
        let containing: Vec<&Facet> =
            self.facets.iter().filter(|f| face & !f.mask == 0).collect();
        if containing.is_empty() {
            return Err(Error::NotAFace(format!("{:?}", self.face_labels(face))));
        }
        let keep: Vec<usize> =
            (0..self.d()).filter(|p| !seen_parts.contains(p)).collect();
        if keep.is_empty() {
            // the link of a facet: one empty facet of weight 1
            return Ok(PathComplex {
                parts: Vec::new(),
                vert_part: Vec::new(),
                vert_label: Vec::new(),
                vert_flat: Vec::new(),
                facets: vec![Facet { verts: Vec::new(), mask: 0, weight: int(1) }],
            });
        }
        // vertices present in some containing facet, grouped by part
        let mut present: Vec<u32> = Vec::new();
        for f in &containing {
            for &v in &f.verts {
                if face & (1u128 << v) == 0 && !present.contains(&v) {
                    present.push(v);
                }
            }
        }
        present.sort_unstable();
        let mut parts = Vec::new();
        for &p in &keep {
            let labs: Vec<String> = present
                .iter()
                .filter(|&&v| self.vert_part[v as usize] == p)
                .map(|&v| self.vert_label[v as usize].clone())
                .collect();
            parts.push((self.parts[p].index, labs));
        }
        let facets: Vec<(Vec<String>, Rat)> = containing
            .iter()
            .map(|f| {
                let labs: Vec<String> = f
                    .verts
                    .iter()
                    .filter(|&&v| face & (1u128 << v) == 0)
                    .map(|&v| self.vert_label[v as usize].clone())
                    .collect();
                (labs, f.weight.clone())
            })
            .collect();
        let mut out = PathComplex::new(parts, facets)?;
        // carry flat annotations into the link
        for v in 0..out.nv() as u32 {
            let parent = self.vertex_by_label(out.label(v))?;
            out.vert_flat[v as usize] = self.vert_flat[parent as usize];
        }
        Ok(out)
    }

    /// Reweights facets by a strictly positive per-vertex field and
    /// renormalizes.
    pub fn apply_external_field(&self, field: &[Rat]) -> Result<PathComplex> {
        if field.len() != self.nv() {
            return Err(Error::IndexOutOfRange(format!(
                "field has {} entries for {} vertices",
                field.len(),
                self.nv()
            )));
        }
        for (v, w) in field.iter().enumerate() {
            if *w <= int(0) {
                return Err(Error::NonpositiveWeight(format!(
                    "field at `{}`",
                    self.vert_label[v]
                )));
            }
        }
        let mut out = self.clone();
        let mut total = int(0);
        for f in &mut out.facets {
            for &v in &f.verts {
                f.weight *= field[v as usize].clone();
            }
            total += f.weight.clone();
        }
        for f in &mut out.facets {
            f.weight /= total.clone();
        }
        Ok(out)
    }

    /// Exact marginal distribution over vertex tuples in the named part
    /// positions (0-based, ascending).
    pub fn marginal(&self, positions: &[usize]) -> Result<HashMap<Vec<u32>, Rat>> {
        for &p in positions {
            if p >= self.d() {
                return Err(Error::IndexOutOfRange(format!("part position {p}")));
            }
        }
        let mut out: HashMap<Vec<u32>, Rat> = HashMap::new();
        for f in &self.facets {
            let key: Vec<u32> = positions
                .iter()
                .map(|&p| *f.verts.iter().find(|&&v| self.vert_part[v as usize] == p).unwrap())
                .collect();
            *out.entry(key).or_insert_with(|| int(0)) += f.weight.clone();
        }
        Ok(out)
    }

    /// Part positions (0-based) met by a face mask, ascending.
    pub fn positions_met(&self, mask: u128) -> Vec<usize> {
        let mut ps: Vec<usize> =
            ids_of(mask).into_iter().map(|v| self.vert_part[v as usize]).collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }

    /// Exhaustive conditional-independence check.
    ///
    /// For every pair of part positions i < k-1 and every face meeting the
    /// strict interior of (i,k) (codim-2 faces only in `top_link_only`
    /// mode), the joint distribution of the part-i and part-k coordinates
    /// conditioned on the face must equal the product of its marginals.
    pub fn verify_path_complex(&self, top_link_only: bool) -> Result<PathReport> {
        let d = self.d();
        if d <= 2 {
            // no pair i < k-1 exists; vacuous
            return Ok(PathReport { pass: true, witness: None, checks: 0 });
        }
        let index = self.face_index()?;
        let mut faces: Vec<u128> = index.facets_of.keys().copied().collect();
        faces.sort_unstable();

        let results: Vec<(Vec<u32>, Option<PathWitness>, usize)> = faces
            .par_iter()
            .map(|&tau| {
                let met = self.positions_met(tau);
                if top_link_only && met.len() != d - 2 {
                    return (ids_of(tau), None, 0);
                }
                let fids = &index.facets_of[&tau];
                let mut checks = 0usize;
                for pi in 0..d {
                    for pk in pi + 2..d {
                        let interior_met =
                            met.iter().any(|&p| p > pi && p < pk);
                        if !interior_met {
                            continue;
                        }
                        // joint and marginals of coordinates (pi, pk) given tau
                        let mut joint: HashMap<(u32, u32), Rat> = HashMap::new();
                        let mut m1: HashMap<u32, Rat> = HashMap::new();
                        let mut m2: HashMap<u32, Rat> = HashMap::new();
                        let mut w_tau = int(0);
                        for &fi in fids {
                            let f = &self.facets[fi as usize];
                            let a = *f
                                .verts
                                .iter()
                                .find(|&&v| self.vert_part[v as usize] == pi)
                                .unwrap();
                            let b = *f
                                .verts
                                .iter()
                                .find(|&&v| self.vert_part[v as usize] == pk)
                                .unwrap();
                            *joint.entry((a, b)).or_insert_with(|| int(0)) +=
                                f.weight.clone();
                            *m1.entry(a).or_insert_with(|| int(0)) += f.weight.clone();
                            *m2.entry(b).or_insert_with(|| int(0)) += f.weight.clone();
                            w_tau += f.weight.clone();
                        }
                        let mut fs: Vec<u32> = m1.keys().copied().collect();
                        let mut ks: Vec<u32> = m2.keys().copied().collect();
                        fs.sort_unstable();
                        ks.sort_unstable();
                        for &a in &fs {
                            for &b in &ks {
                                checks += 1;
                                let j = joint.get(&(a, b)).cloned().unwrap_or_else(|| int(0));
                                // P[F,K|tau] = P[F|tau] P[K|tau], cross-multiplied
                                if j.clone() * w_tau.clone() != m1[&a].clone() * m2[&b].clone() {
                                    let witness = PathWitness {
                                        f: self.vert_label[a as usize].clone(),
                                        k: self.vert_label[b as usize].clone(),
                                        tau: self.face_labels(tau),
                                        lhs: j / w_tau.clone(),
                                        rhs: (m1[&a].clone() / w_tau.clone())
                                            * (m2[&b].clone() / w_tau.clone()),
                                    };
                                    return (ids_of(tau), Some(witness), checks);
                                }
                            }
                        }
                    }
                }
                (ids_of(tau), None, checks)
            })
            .collect();

        let mut checks = 0;
        let mut witness = None;
        for (_, w, c) in results {
            checks += c;
            if witness.is_none() && w.is_some() {
                // faces were sorted, so the first hit is the smallest
                witness = w;
            }
        }
        Ok(PathReport { pass: witness.is_none(), witness, checks })
    }

    /// True iff every link of codimension >= 2 (the empty face included)
    /// has a connected 1-skeleton.
    pub fn check_connected(&self) -> Result<bool> {
        let d = self.d();
        if d < 2 {
            return Ok(true);
        }
        let index = self.face_index()?;
        for (&tau, fids) in &index.facets_of {
            let met = self.positions_met(tau).len();
            if d - met < 2 {
                continue;
            }
            // union-find over the link's vertices; each facet is a clique
            let mut parent: HashMap<u32, u32> = HashMap::new();
            fn find(parent: &mut HashMap<u32, u32>, v: u32) -> u32 {
                let p = parent[&v];
                if p == v {
                    return v;
                }
                let r = find(parent, p);
                parent.insert(v, r);
                r
            }
            for &fi in fids {
                let vs: Vec<u32> = self.facets[fi as usize]
                    .verts
                    .iter()
                    .copied()
                    .filter(|&v| tau & (1u128 << v) == 0)
                    .collect();
                for &v in &vs {
                    parent.entry(v).or_insert(v);
                }
                for w in vs.windows(2) {
                    let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                    if a != b {
                        parent.insert(a, b);
                    }
                }
            }
            let keys: Vec<u32> = parent.keys().copied().collect();
            let mut roots: Vec<u32> = keys.iter().map(|&v| find(&mut parent, v)).collect();
            roots.sort_unstable();
            roots.dedup();
            if roots.len() > 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Contiguity of a face: the window of type indices it meets, and the
    /// window its link's facets occupy, when these are consecutive runs.
    pub fn classify_contiguity(&self, face: u128) -> Result<Contiguity> {
        if face != 0 && !self.is_face(face) {
            return Err(Error::NotAFace(format!("{:?}", self.face_labels(face))));
        }
        let met = self.positions_met(face);
        let consecutive =
            |ps: &[usize]| !ps.is_empty() && ps[ps.len() - 1] - ps[0] + 1 == ps.len();
        let contiguous = if consecutive(&met) {
            Some((self.parts[met[0]].index, self.parts[met[met.len() - 1]].index))
        } else {
            None
        };
        let missing: Vec<usize> = (0..self.d()).filter(|p| !met.contains(p)).collect();
        let link_contiguous = if consecutive(&missing) {
            Some((self.parts[missing[0]].index, self.parts[missing[missing.len() - 1]].index))
        } else {
            None
        };
        Ok(Contiguity { contiguous, link_contiguous })
    }
}

/// Face probabilities and containing-facet lists for every face.
pub struct FaceIndex {
    pub prob: HashMap<u128, Rat>,
    pub facets_of: HashMap<u128, Vec<u32>>,
}

#[derive(Debug, Clone)]
pub struct PathWitness {
    pub f: String,
    pub k: String,
    pub tau: Vec<String>,
    pub lhs: Rat,
    pub rhs: Rat,
}

#[derive(Debug, Clone)]
pub struct PathReport {
    pub pass: bool,
    pub witness: Option<PathWitness>,
    pub checks: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contiguity {
    pub contiguous: Option<(usize, usize)>,
    pub link_contiguous: Option<(usize, usize)>,
}

/// The flag complex of a ranked lattice: vertices are proper flats, part
/// T_k holds the rank-k flats, facets are maximal chains. `flat_weights`
/// (indexed by lattice flat id) install an external field; `None` is the
/// uniform measure.
pub fn chain_complex(lat: &RankedLattice, flat_weights: Option<&[Rat]>) -> Result<PathComplex> {
    let height = lat.height();
    if height < 2 {
        return Err(Error::DomainError(format!(
            "lattice of rank {height} has no proper flag complex"
        )));
    }
    let d = height - 1;
    if let Some(w) = flat_weights {
        if w.len() != lat.len() {
            return Err(Error::IndexOutOfRange(format!(
                "{} weights for {} flats",
                w.len(),
                lat.len()
            )));
        }
        for (i, x) in w.iter().enumerate() {
            if *x <= int(0) {
                return Err(Error::NonpositiveWeight(lat.flat_label(i)));
            }
        }
    }
    let chains = lat.maximal_chains();
    let mut facets = Vec::new();
    for chain in &chains {
        if chain.len() != height + 1 {
            let missing = (0..=height)
                .find(|&r| !chain.iter().any(|&f| lat.rank_of(f) == r))
                .unwrap_or(0);
            return Err(Error::RankGapDetected(format!(
                "a maximal chain skips rank {missing}"
            )));
        }
        let proper = &chain[1..chain.len() - 1];
        let labels: Vec<String> = proper.iter().map(|&f| lat.flat_label(f)).collect();
        let weight = match flat_weights {
            None => int(1),
            Some(w) => proper.iter().fold(int(1), |acc, &f| acc * w[f].clone()),
        };
        facets.push((labels, weight));
    }
    // parts hold the proper flats that occur on some maximal chain
    let mut part_flats: Vec<Vec<usize>> = vec![Vec::new(); d];
    for chain in &chains {
        for &f in &chain[1..chain.len() - 1] {
            let k = lat.rank_of(f);
            if !part_flats[k - 1].contains(&f) {
                part_flats[k - 1].push(f);
            }
        }
    }
    let mut parts = Vec::new();
    let mut flat_ids: Vec<u64> = Vec::new();
    for (k, flats) in part_flats.iter_mut().enumerate() {
        flats.sort_unstable();
        if flats.is_empty() {
            return Err(Error::RankGapDetected(format!("no flats of rank {}", k + 1)));
        }
        let labels: Vec<String> = flats.iter().map(|&f| lat.flat_label(f)).collect();
        for &f in flats.iter() {
            flat_ids.push(lat.flat(f));
        }
        parts.push((k + 1, labels));
    }
    let mut cx = PathComplex::new(parts, facets)?;
    for (v, &bits) in flat_ids.iter().enumerate() {
        cx.vert_flat[v] = Some(bits);
    }
    Ok(cx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{birkhoff_lattice, build_poset, Caps};
    use crate::rat::rat;

    fn four_facet() -> PathComplex {
        let p = build_poset(&["a", "b", "c", "d"], &[("b", "c"), ("c", "d")]).unwrap();
        let lat = birkhoff_lattice(&p, &Caps::default()).unwrap();
        chain_complex(&lat, None).unwrap()
    }

    #[test]
    fn four_facet_shape() {
        let cx = four_facet();
        assert_eq!(cx.d(), 3);
        let sizes: Vec<usize> = cx.parts().iter().map(|p| p.verts.len()).collect();
        assert_eq!(sizes, vec![2, 2, 2]);
        assert_eq!(cx.facets().len(), 4);
        for f in cx.facets() {
            assert_eq!(f.weight, rat(1, 4));
        }
    }

    #[test]
    fn chain_lattice_single_facet() {
        let p = build_poset(&["1", "2", "3"], &[("1", "2"), ("2", "3")]).unwrap();
        let lat = birkhoff_lattice(&p, &Caps::default()).unwrap();
        let cx = chain_complex(&lat, None).unwrap();
        assert_eq!(cx.facets().len(), 1);
        assert_eq!(cx.facets()[0].weight, int(1));
    }

    #[test]
    fn link_at_b_has_three_uniform_facets() {
        let cx = four_facet();
        let face = cx.face_from_labels(&["{b}"]).unwrap();
        let lk = cx.link(face).unwrap();
        assert_eq!(lk.facets().len(), 3);
        for f in lk.facets() {
            assert_eq!(f.weight, rat(1, 3));
        }
        // original type indices survive
        let idx: Vec<usize> = lk.parts().iter().map(|p| p.index).collect();
        assert_eq!(idx, vec![2, 3]);
    }

    #[test]
    fn verify_passes_on_flag_complex() {
        let cx = four_facet();
        let rep = cx.verify_path_complex(false).unwrap();
        assert!(rep.pass, "flag complexes satisfy conditional independence");
        // conditioning on a middle vertex pins one endpoint here, so this
        // particular complex stays independent under any reweighting
        let mut field = vec![int(1); cx.nv()];
        field[0] = int(5);
        let rw = cx.apply_external_field(&field).unwrap();
        assert!(rw.verify_path_complex(false).unwrap().pass);
    }

    #[test]
    fn verify_fails_on_skewed_square() {
        // a genuine 2x2 conditional table with one heavy corner
        let bad = PathComplex::new(
            vec![
                (1, vec!["x1".into(), "y1".into()]),
                (2, vec!["m".into()]),
                (3, vec!["x3".into(), "y3".into()]),
            ],
            vec![
                (vec!["x1".into(), "m".into(), "x3".into()], int(1)),
                (vec!["x1".into(), "m".into(), "y3".into()], int(1)),
                (vec!["y1".into(), "m".into(), "x3".into()], int(1)),
                (vec!["y1".into(), "m".into(), "y3".into()], int(2)),
            ],
        )
        .unwrap();
        let rep = bad.verify_path_complex(false).unwrap();
        assert!(!rep.pass);
        let w = rep.witness.unwrap();
        assert_eq!(w.tau, vec!["m".to_string()]);
        assert_eq!((w.f.as_str(), w.k.as_str()), ("x1", "x3"));
        assert_eq!(w.lhs, rat(1, 5));
        assert_eq!(w.rhs, rat(2, 5) * rat(2, 5));
    }

    #[test]
    fn contiguity_windows() {
        let cx = four_facet();
        let f = cx.facets()[0].clone();
        // single middle vertex: contiguous [2,2], link-contiguous None
        // (complement {1,3} is not a run)
        let mid = f.verts.iter().find(|&&v| cx.part_of(v) == 1).copied().unwrap();
        let c = cx.classify_contiguity(1u128 << mid).unwrap();
        assert_eq!(c.contiguous, Some((2, 2)));
        assert_eq!(c.link_contiguous, None);
        // empty face: not contiguous, link-contiguous over everything
        let c = cx.classify_contiguity(0).unwrap();
        assert_eq!(c.contiguous, None);
        assert_eq!(c.link_contiguous, Some((1, 3)));
    }

    #[test]
    fn connectedness() {
        assert!(four_facet().check_connected().unwrap());
        // two disjoint facets on shared parts: disconnected at the empty face
        let cx = PathComplex::new(
            vec![
                (1, vec!["x1".into(), "y1".into()]),
                (2, vec!["x2".into(), "y2".into()]),
            ],
            vec![
                (vec!["x1".into(), "x2".into()], int(1)),
                (vec!["y1".into(), "y2".into()], int(1)),
            ],
        )
        .unwrap();
        assert!(!cx.check_connected().unwrap());
    }
}
