//! A fixed, deterministic corpus of posets and derived complexes.
//!
//! The corpus contains every labeled poset on 3 and 4 elements
//! (enumerated from scratch by filtering antisymmetric transitive
//! relations) plus a band of structured posets on 5-7 elements:
//! chains, fences, antichains, crowns, bipartite orders, trees,
//! disjoint unions, and one-free-element variants. Enumeration order
//! is fixed, so instance ids are stable across runs.

use pathcomplex::complex::{chain_complex, PathComplex};
use pathcomplex::error::Result;
use pathcomplex::order::{
    birkhoff_lattice, build_poset, random_order_reversing, Caps, Poset,
};
use pathcomplex::rat::Rat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::input::lattice_weights;

/// One corpus instance: a named poset.
pub struct CorpusEntry {
    pub name: String,
    pub poset: Poset,
}

const LETTERS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// All strict partial orders on `n` labeled elements (n <= 4), as cover
/// lists, enumerated by filtering every antisymmetric relation for
/// transitivity.
pub fn labeled_relations(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n <= 4, "labeled enumeration is quadratic-exponential; keep n small");
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    let np = pairs.len();
    let mut out = Vec::new();
    'cand: for bits in 0u32..(1u32 << np) {
        let has = |i: usize, j: usize| -> bool {
            pairs
                .iter()
                .position(|&p| p == (i, j))
                .map(|k| bits >> k & 1 == 1)
                .unwrap_or(false)
        };
        // antisymmetry
        for i in 0..n {
            for j in i + 1..n {
                if has(i, j) && has(j, i) {
                    continue 'cand;
                }
            }
        }
        // transitivity
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if has(i, j) && has(j, k) && !has(i, k) {
                        continue 'cand;
                    }
                }
            }
        }
        // covers: related pairs with nothing strictly between
        let mut covers = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if has(i, j) && !(0..n).any(|k| has(i, k) && has(k, j)) {
                    covers.push((i, j));
                }
            }
        }
        out.push(covers);
    }
    out
}

/// Strict partial orders contained in the natural order `0 < 1 < ... <
/// n-1`, as cover lists. Every isomorphism class of posets on n
/// elements has at least one representative here (relabel along any
/// linear extension), so label-invariant properties checked over this
/// list hold for all posets on n elements.
pub fn natural_relations(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n <= 6, "2^C(n,2) candidates; keep n small");
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    let np = pairs.len();
    let mut out = Vec::new();
    'cand: for bits in 0u32..(1u32 << np) {
        let has = |i: usize, j: usize| -> bool {
            pairs
                .iter()
                .position(|&p| p == (i, j))
                .map(|k| bits >> k & 1 == 1)
                .unwrap_or(false)
        };
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if has(i, j) && has(j, k) && !has(i, k) {
                        continue 'cand;
                    }
                }
            }
        }
        let mut covers = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if has(i, j) && !(i + 1..j).any(|k| has(i, k) && has(k, j)) {
                    covers.push((i, j));
                }
            }
        }
        out.push(covers);
    }
    out
}

fn poset_from(n: usize, covers: &[(usize, usize)]) -> Poset {
    let elements: Vec<&str> = LETTERS[..n].to_vec();
    let cover_labels: Vec<(&str, &str)> =
        covers.iter().map(|&(i, j)| (LETTERS[i], LETTERS[j])).collect();
    build_poset(&elements, &cover_labels).expect("generated covers are acyclic")
}

fn chain(n: usize) -> Vec<(usize, usize)> {
    (0..n - 1).map(|i| (i, i + 1)).collect()
}

fn fence(n: usize) -> Vec<(usize, usize)> {
    // a0 < a1 > a2 < a3 > ...
    (0..n - 1)
        .map(|i| if i % 2 == 0 { (i, i + 1) } else { (i + 1, i) })
        .collect()
}

fn bipartite_order(lo: usize, hi: usize) -> Vec<(usize, usize)> {
    let mut covers = Vec::new();
    for i in 0..lo {
        for j in 0..hi {
            covers.push((i, lo + j));
        }
    }
    covers
}

fn crown6() -> Vec<(usize, usize)> {
    // 3 minimal and 3 maximal elements, x_i < y_j exactly when i != j
    let mut covers = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                covers.push((i, 3 + j));
            }
        }
    }
    covers
}

/// Structured posets on 5-7 elements.
pub fn structured_entries() -> Vec<CorpusEntry> {
    let mut specs: Vec<(String, usize, Vec<(usize, usize)>)> = Vec::new();
    for n in [5, 6, 7] {
        specs.push((format!("chain{n}"), n, chain(n)));
        specs.push((format!("fence{n}"), n, fence(n)));
    }
    specs.push(("antichain5".into(), 5, vec![]));
    specs.push(("crown6".into(), 6, crown6()));
    for (lo, hi) in [(2, 3), (3, 3), (2, 4), (3, 4), (2, 5)] {
        specs.push((format!("bipartite{lo}x{hi}"), lo + hi, bipartite_order(lo, hi)));
    }
    // diamond with a tail: a < b,c < d < e (+ longer tail on 6)
    specs.push(("diamond_tail5".into(), 5, vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)]));
    specs.push((
        "diamond_tail6".into(),
        6,
        vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (4, 5)],
    ));
    // butterfly: a,b < c < d,e
    specs.push(("butterfly5".into(), 5, vec![(0, 2), (1, 2), (2, 3), (2, 4)]));
    // chain with one free element
    for n in [5, 6, 7] {
        let mut covers = Vec::new();
        for i in 1..n - 1 {
            covers.push((i, i + 1));
        }
        specs.push((format!("free_plus_chain{n}"), n, covers));
    }
    // two disjoint chains
    for (lo, hi) in [(2, 3), (3, 3), (2, 4), (3, 4)] {
        let mut covers: Vec<(usize, usize)> = (0..lo - 1).map(|i| (i, i + 1)).collect();
        covers.extend((0..hi - 1).map(|i| (lo + i, lo + i + 1)));
        specs.push((format!("chains{lo}p{hi}"), lo + hi, covers));
    }
    // binary tree on 7: root below two children, each below two leaves
    specs.push((
        "tree7".into(),
        7,
        vec![(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)],
    ));
    // chain of diamonds on 7: a < b,c < d < e,f < g
    specs.push((
        "double_diamond7".into(),
        7,
        vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6)],
    ));
    // 3-antichain over a 2-chain, plus a 5-element "W"
    specs.push(("antichain3_over_chain2".into(), 5, vec![(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]));
    specs.push(("w5".into(), 5, vec![(0, 1), (2, 1), (2, 3), (4, 3)]));

    specs
        .into_iter()
        .map(|(name, n, covers)| CorpusEntry { name, poset: poset_from(n, &covers) })
        .collect()
}

/// The full fixed corpus: every labeled poset on 3 and 4 elements,
/// then the structured 5-7 element band.
pub fn corpus() -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for n in [3usize, 4] {
        for (k, covers) in labeled_relations(n).into_iter().enumerate() {
            out.push(CorpusEntry {
                name: format!("p{n}_{k:03}"),
                poset: poset_from(n, &covers),
            });
        }
    }
    out.extend(structured_entries());
    out
}

/// The uniform chain complex of the poset's downset lattice plus
/// `n_psi` weighted ones with seeded random order-reversing fields.
/// Returned tags name the weighting.
pub fn entry_complexes(
    entry: &CorpusEntry,
    n_psi: usize,
    base_seed: u64,
) -> Result<Vec<(String, PathComplex)>> {
    let caps = Caps::default();
    let lat = birkhoff_lattice(&entry.poset, &caps)?;
    let mut out = Vec::new();
    out.push((format!("{}/uniform", entry.name), chain_complex(&lat, None)?));
    for k in 0..n_psi {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed ^ (k as u64).wrapping_mul(0x9e37_79b9));
        let psi = random_order_reversing(&entry.poset, &mut rng);
        let weights: Vec<Rat> = lattice_weights(&lat, &psi)?;
        out.push((
            format!("{}/psi{}", entry.name, k),
            chain_complex(&lat, Some(&weights))?,
        ));
    }
    Ok(out)
}
