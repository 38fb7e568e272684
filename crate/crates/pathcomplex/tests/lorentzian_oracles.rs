//! Exact oracles for the interpolation systems, projection maps,
//! facet polynomials, quadratic Hessians, cones, coefficient
//! sequences, and certificates.

use std::collections::HashMap;

use pathcomplex::complex::{chain_complex, mask_of, PathComplex};
use pathcomplex::lorentzian::{
    c_phi, cardinality_coloring, check_commutativity, ck_sequence, ell_identity_suite,
    ell_vector, lorentzian_certificate, make_alpha_beta, pi_table, spiked_coloring,
    trivial_coloring, AbCtx, AbSystem, Anchor, EllForm,
};
use pathcomplex::matroid::{flat_lattice, hrw_sequence, Matroid};
use pathcomplex::order::{
    birkhoff_lattice, build_poset, classify_lattice, lift_flat_weight,
    random_order_reversing, Caps, Poset, RankedLattice,
};
use num_traits::Zero;
use pathcomplex::rat::{int, rat, Rat};
use pathcomplex::spectral::colored_toplink_check;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn four_facet_lattice() -> RankedLattice {
    let p = build_poset(&["a", "b", "c", "d"], &[("b", "c"), ("c", "d")]).unwrap();
    birkhoff_lattice(&p, &Caps::default()).unwrap()
}

fn twelve_chain_lattice() -> RankedLattice {
    let p = build_poset(&["a", "b", "c", "d"], &[("c", "d")]).unwrap();
    birkhoff_lattice(&p, &Caps::default()).unwrap()
}

fn lowerbound_complex() -> PathComplex {
    let p = build_poset(
        &["1", "2", "3", "4", "5"],
        &[("2", "3"), ("3", "4"), ("4", "5")],
    )
    .unwrap();
    let lat = birkhoff_lattice(&p, &Caps::default()).unwrap();
    let d = lat.height() - 1;
    let mut weights = Vec::new();
    for f in 0..lat.len() {
        let r = lat.rank_of(f);
        if r == 0 || r == d + 1 {
            weights.push(int(1));
        } else if (lat.flat(f) & 1 != 0) == (r <= d / 2) {
            weights.push(int(2));
        } else {
            weights.push(int(1));
        }
    }
    chain_complex(&lat, Some(&weights)).unwrap()
}

fn weighted_chain_complex(p: &Poset, seed: u64) -> PathComplex {
    let lat = birkhoff_lattice(p, &Caps::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = random_order_reversing(p, &mut rng);
    let weights: Vec<Rat> = (0..lat.len())
        .map(|f| lift_flat_weight(lat.base_labels(), lat.flat(f), &psi).unwrap())
        .collect();
    chain_complex(&lat, Some(&weights)).unwrap()
}

fn k4_matroid() -> Matroid {
    Matroid::graphic(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
}

fn fano_matroid() -> Matroid {
    let lines: Vec<Vec<usize>> =
        (0..7).map(|i| vec![i, (i + 1) % 7, (i + 3) % 7]).collect();
    let mut bases = Vec::new();
    for a in 0..7 {
        for b in a + 1..7 {
            for c in b + 1..7 {
                let mut t = vec![a, b, c];
                t.sort_unstable();
                if !lines.iter().any(|l| {
                    let mut s = l.clone();
                    s.sort_unstable();
                    s == t
                }) {
                    bases.push(t);
                }
            }
        }
    }
    Matroid::from_bases(7, &bases).unwrap()
}

fn flag_complex(m: &Matroid) -> PathComplex {
    let lat = flat_lattice(m, &Caps::default()).unwrap();
    chain_complex(&lat, None).unwrap()
}

fn det_exact(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut det = int(1);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => return int(0),
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let pv = a[col][col].clone();
        det *= pv.clone();
        for r in col + 1..n {
            let factor = a[r][col].clone() / pv.clone();
            for c in col..n {
                let sub = factor.clone() * a[col][c].clone();
                a[r][c] -= sub;
            }
        }
    }
    det
}

fn rank_exact(m: &[Vec<Rat>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let pivot = (rank..rows).find(|&r| !a[r][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => continue,
        };
        a.swap(pivot, rank);
        let pv = a[rank][col].clone();
        for r in 0..rows {
            if r != rank && !a[r][col].is_zero() {
                let factor = a[r][col].clone() / pv.clone();
                for c in 0..cols {
                    let sub = factor.clone() * a[rank][c].clone();
                    a[r][c] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// All anchored 4-subchains of a facet chain, bottom and top included.
fn anchored_four_chains(cx: &PathComplex) -> Vec<[Anchor; 4]> {
    let mut out = Vec::new();
    for f in cx.facets() {
        let mut chain = vec![Anchor::Bottom];
        let mut by_pos = f.verts.clone();
        by_pos.sort_by_key(|&v| cx.type_index(v));
        chain.extend(by_pos.iter().map(|&v| Anchor::Vert(v)));
        chain.push(Anchor::Top);
        let n = chain.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for e in c + 1..n {
                        out.push([chain[a], chain[b], chain[c], chain[e]]);
                    }
                }
            }
        }
    }
    out
}

fn check_four_identities(ctx: &AbCtx) {
    for [k, f, g, l] in anchored_four_chains(ctx.cx) {
        // (1) alpha_K^L(F) = alpha_K^G(F) alpha_K^L(G)
        assert_eq!(
            ctx.alpha(&k, &l, &f),
            ctx.alpha(&k, &g, &f) * ctx.alpha(&k, &l, &g)
        );
        // (2) beta_K^L(G) = beta_F^L(G) beta_K^L(F)
        assert_eq!(
            ctx.beta(&k, &l, &g),
            ctx.beta(&f, &l, &g) * ctx.beta(&k, &l, &f)
        );
        // (3) alpha_F^L(G) = alpha_K^L(G) - beta_F^L(G) alpha_K^L(F)
        assert_eq!(
            ctx.alpha(&f, &l, &g),
            ctx.alpha(&k, &l, &g) - ctx.beta(&f, &l, &g) * ctx.alpha(&k, &l, &f)
        );
        // (4) beta_K^G(F) = beta_K^L(F) - alpha_K^G(F) beta_K^L(G)
        assert_eq!(
            ctx.beta(&k, &g, &f),
            ctx.beta(&k, &l, &f) - ctx.alpha(&k, &g, &f) * ctx.beta(&k, &l, &g)
        );
    }
}

#[test]
fn alpha_beta_identities_hold_on_every_anchored_four_chain() {
    let lat = twelve_chain_lattice();
    let cx = chain_complex(&lat, None).unwrap();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    check_four_identities(&ctx);

    let ctx_s = make_alpha_beta(&cx, AbSystem::SRank(rat(5, 3))).unwrap();
    check_four_identities(&ctx_s);

    let m = k4_matroid();
    let fc = flag_complex(&m);
    let card = cardinality_coloring(&fc, m.n()).unwrap();
    let ctx_c = make_alpha_beta(&fc, AbSystem::Coloring(card)).unwrap();
    check_four_identities(&ctx_c);
}

#[test]
fn projection_reanchors_the_interpolation_vectors() {
    let lat = twelve_chain_lattice();
    let cx = chain_complex(&lat, None).unwrap();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let bt = (Anchor::Bottom, Anchor::Top);
    let alpha: Vec<Rat> = (0..cx.nv() as u32)
        .map(|v| ctx.alpha(&bt.0, &bt.1, &Anchor::Vert(v)))
        .collect();
    let beta: Vec<Rat> = (0..cx.nv() as u32)
        .map(|v| ctx.beta(&bt.0, &bt.1, &Anchor::Vert(v)))
        .collect();
    for f in 0..cx.nv() as u32 {
        let fv = Anchor::Vert(f);
        let pa = ctx.pi_apply(0, f, &alpha).unwrap();
        let pb = ctx.pi_apply(0, f, &beta).unwrap();
        for h in ctx.link_verts(1u128 << f).unwrap() {
            let hv = Anchor::Vert(h);
            if cx.type_index(h) > cx.type_index(f) {
                // alpha re-anchors its bottom at F, beta dies above F
                assert_eq!(pa[h as usize], ctx.alpha(&fv, &bt.1, &hv));
                assert_eq!(pb[h as usize], int(0));
            } else {
                assert_eq!(pa[h as usize], int(0));
                assert_eq!(pb[h as usize], ctx.beta(&bt.0, &fv, &hv));
            }
        }
    }
}

#[test]
fn projections_commute_and_a_corrupted_table_is_caught() {
    for cx in [
        chain_complex(&twelve_chain_lattice(), None).unwrap(),
        chain_complex(&four_facet_lattice(), None).unwrap(),
        lowerbound_complex(),
    ] {
        let ctx =
            make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
        assert!(check_commutativity(&ctx, None).unwrap().is_none());
        let ctx_s = make_alpha_beta(&cx, AbSystem::SRank(rat(7, 4))).unwrap();
        assert!(check_commutativity(&ctx_s, None).unwrap().is_none());
    }

    // corrupt one beta coefficient: order dependence must surface
    let cx = chain_complex(&twelve_chain_lattice(), None).unwrap();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let mut table = pi_table(&ctx).unwrap();
    let key = {
        let mut keys: Vec<_> = table
            .coeff
            .keys()
            .filter(|(lo, f, hi, h)| {
                *lo == Anchor::Bottom
                    && *hi == Anchor::Top
                    && cx.type_index(*f) == 2
                    && cx.type_index(*h) == 3
            })
            .cloned()
            .collect();
        keys.sort_by_key(|&(_, f, _, h)| (f, h));
        keys[0]
    };
    *table.coeff.get_mut(&key).unwrap() += rat(1, 7);
    let witness = check_commutativity(&ctx, Some(&table)).unwrap();
    let w = witness.expect("corruption must break commutativity");
    assert_ne!(w.first, w.second);

    // d = 2: the joint links are empty, so the check is vacuous
    let p2 = build_poset(&["a", "b"], &[]).unwrap();
    let cx2 = chain_complex(&birkhoff_lattice(&p2, &Caps::default()).unwrap(), None).unwrap();
    let ctx2 = make_alpha_beta(&cx2, AbSystem::Coloring(trivial_coloring(&cx2))).unwrap();
    assert!(check_commutativity(&ctx2, None).unwrap().is_none());
}

fn hessian_oracle(ctx: &AbCtx, sigma: u128, t0: &[Rat]) -> Vec<Vec<Rat>> {
    // second differences of the quadratic evaluator: exact
    let verts = ctx.link_verts(sigma).unwrap();
    let n = verts.len();
    let p = |t: &[Rat]| ctx.eval_p(sigma, t).unwrap();
    let mut h = vec![vec![int(0); n]; n];
    for (i, &f) in verts.iter().enumerate() {
        for (j, &g) in verts.iter().enumerate() {
            let mut tf = t0.to_vec();
            tf[f as usize] += int(1);
            let mut tg = t0.to_vec();
            tg[g as usize] += int(1);
            let mut tfg = t0.to_vec();
            tfg[f as usize] += int(1);
            tfg[g as usize] += int(1);
            h[i][j] = p(&tfg) - p(&tf) - p(&tg) + p(t0);
        }
    }
    h
}

#[test]
fn quadratic_hessian_matches_second_differences_and_derivatives() {
    let cx = chain_complex(&twelve_chain_lattice(), None).unwrap();
    for sys in [
        AbSystem::Coloring(trivial_coloring(&cx)),
        AbSystem::SRank(int(2)),
    ] {
        let ctx = make_alpha_beta(&cx, sys).unwrap();
        let t0: Vec<Rat> = (0..cx.nv() as i64).map(|v| rat(v + 1, v + 3)).collect();
        for sigma in ctx.codim2_faces() {
            let (verts, h) = ctx.hessian_quadratic(sigma).unwrap();
            let oracle = hessian_oracle(&ctx, sigma, &t0);
            assert_eq!(h, oracle, "face {:?}", cx.face_labels(sigma));
            // and against iterated directional derivatives
            let zeros = vec![int(0); cx.nv()];
            for (i, &f) in verts.iter().enumerate() {
                for (j, &g) in verts.iter().enumerate() {
                    if i > j {
                        continue;
                    }
                    let mut ef = zeros.clone();
                    ef[f as usize] = int(1);
                    let mut eg = zeros.clone();
                    eg[g as usize] = int(1);
                    let val = ctx.dderiv(sigma, &[ef, eg], &zeros).unwrap();
                    let expect = if i == j { h[i][i].clone() / int(2) * int(2) } else { h[i][j].clone() };
                    assert_eq!(val, expect);
                }
            }
        }
    }
}

#[test]
fn single_chain_hessian_is_the_frozen_two_by_two() {
    let p = build_poset(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
    let lat = birkhoff_lattice(&p, &Caps::default()).unwrap();
    let cx = chain_complex(&lat, None).unwrap();
    assert_eq!(cx.d(), 2);
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let (verts, h) = ctx.hessian_quadratic(0).unwrap();
    assert_eq!(verts.len(), 2);
    let half = rat(1, 2);
    assert_eq!(h[0][0], -half.clone());
    assert_eq!(h[1][1], -half);
    assert_eq!(h[0][1], int(1));
    assert_eq!(h[1][0], int(1));
    let count = pathcomplex::spectral::positive_count_exact(&h, 16).unwrap();
    assert_eq!(count, 1);

    // raw scale: with multiplicative element weights (2, 3) the single
    // facet carries 2*2*3 = 12, and the raw Hessian is 12 times the
    // normalized one: [[-6, 12], [12, -6]]
    let raw = int(12);
    assert_eq!(raw.clone() * h[0][0].clone(), int(-6));
    assert_eq!(raw * h[0][1].clone(), int(12));
}

#[test]
fn three_facet_hessian_has_the_frozen_determinant() {
    // raw facet weights a^2 b, a b^2, b^2 c at (a, b, c) = (1, 2, 1):
    // (2, 4, 4), raw total 10
    let cx = PathComplex::new(
        vec![
            (1, vec!["xa".into(), "xb".into()]),
            (2, vec!["yb".into(), "yc".into()]),
        ],
        vec![
            (vec!["xa".into(), "yb".into()], int(2)),
            (vec!["xb".into(), "yb".into()], int(4)),
            (vec!["xb".into(), "yc".into()], int(4)),
        ],
    )
    .unwrap();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let (verts, h) = ctx.hessian_quadratic(0).unwrap();
    assert_eq!(verts.len(), 4);
    // det scales by total^4 back to the raw determinant -24
    assert_eq!(det_exact(&h) * int(10_000), int(-24));
    let count = pathcomplex::spectral::positive_count_exact(&h, 16).unwrap();
    assert_eq!(count, 1);
}

#[test]
fn nonadjacent_hessians_are_rank_two_with_zero_diagonal() {
    let cx = chain_complex(&twelve_chain_lattice(), None).unwrap();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let mut seen = 0;
    for sigma in ctx.codim2_faces() {
        let cont = cx.classify_contiguity(sigma).unwrap();
        if cont.link_contiguous.is_some() {
            continue;
        }
        let (_, h) = ctx.hessian_quadratic(sigma).unwrap();
        for (i, row) in h.iter().enumerate() {
            assert!(row[i].is_zero(), "diagonal must vanish");
        }
        assert!(rank_exact(&h) <= 2);
        let count = pathcomplex::spectral::positive_count_exact(&h, 16).unwrap();
        assert!(count <= 1);
        seen += 1;
    }
    assert!(seen > 0, "the twelve-chain complex has middle codim-2 faces");

    let lb = lowerbound_complex();
    let ctx = make_alpha_beta(&lb, AbSystem::Coloring(trivial_coloring(&lb))).unwrap();
    let mut seen = 0;
    for sigma in ctx.codim2_faces() {
        if lb.classify_contiguity(sigma).unwrap().link_contiguous.is_some() {
            continue;
        }
        let (_, h) = ctx.hessian_quadratic(sigma).unwrap();
        for (i, row) in h.iter().enumerate() {
            assert!(row[i].is_zero());
        }
        assert!(rank_exact(&h) <= 2);
        seen += 1;
    }
    assert!(seen > 0);
}

#[test]
fn euler_identity_at_ten_random_rational_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for cx in [
        chain_complex(&four_facet_lattice(), None).unwrap(),
        chain_complex(&twelve_chain_lattice(), None).unwrap(),
        lowerbound_complex(),
    ] {
        let d = cx.d() as i64;
        let ctx =
            make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
        for _ in 0..10 {
            let t: Vec<Rat> = (0..cx.nv())
                .map(|_| rat(rng.gen_range(-5..=5), rng.gen_range(1..=4)))
                .collect();
            let p = ctx.eval_p(0, &t).unwrap();
            let grad = ctx.grad_p(0, &t).unwrap();
            let sum: Rat = grad
                .iter()
                .map(|(f, g)| t[*f as usize].clone() * g.clone())
                .sum();
            assert_eq!(int(d) * p, sum, "degree-d homogeneity");
        }
    }
}

#[test]
fn mixed_derivatives_recover_mu_alpha_beta() {
    let cx = chain_complex(&four_facet_lattice(), None).unwrap();
    let d = cx.d();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let alpha: Vec<Rat> = (0..cx.nv() as u32)
        .map(|v| ctx.alpha(&Anchor::Bottom, &Anchor::Top, &Anchor::Vert(v)))
        .collect();
    let beta: Vec<Rat> = (0..cx.nv() as u32)
        .map(|v| ctx.beta(&Anchor::Bottom, &Anchor::Top, &Anchor::Vert(v)))
        .collect();
    let zeros = vec![int(0); cx.nv()];
    for v in 0..cx.nv() as u32 {
        let sigma = 1u128 << v;
        let pos = cx.type_index(v);
        // i-1 beta directions, d-j alpha directions, projected into the
        // face's frame
        let mut dirs = Vec::new();
        for _ in 1..pos {
            dirs.push(ctx.pi_face(sigma, &beta).unwrap());
        }
        for _ in pos..d {
            dirs.push(ctx.pi_face(sigma, &alpha).unwrap());
        }
        let got = ctx.dderiv(sigma, &dirs, &zeros).unwrap();
        assert_eq!(got, ctx.mu_alpha_beta(sigma).unwrap(), "vertex {}", cx.label(v));
    }

    // a facet is contiguous over the full window: no factors remain
    let facet = cx.facets()[0].clone();
    assert_eq!(ctx.mu_alpha_beta(facet.mask).unwrap(), facet.weight);

    // faces with a gap are rejected, and the projected interpolation
    // vector vanishes on their link
    let cx12 = chain_complex(&twelve_chain_lattice(), None).unwrap();
    let ctx12 =
        make_alpha_beta(&cx12, AbSystem::Coloring(trivial_coloring(&cx12))).unwrap();
    let alpha12: Vec<Rat> = (0..cx12.nv() as u32)
        .map(|v| ctx12.alpha(&Anchor::Bottom, &Anchor::Top, &Anchor::Vert(v)))
        .collect();
    let mut gap_faces = 0;
    for f in cx12.facets() {
        let mut by_pos = f.verts.clone();
        by_pos.sort_by_key(|&v| cx12.type_index(v));
        let sigma = mask_of(&[by_pos[0], by_pos[2]]);
        if !cx12.is_face(sigma) {
            continue;
        }
        gap_faces += 1;
        assert!(matches!(
            ctx12.mu_alpha_beta(sigma),
            Err(pathcomplex::Error::NotContiguous(_))
        ));
        let projected = ctx12.pi_face(sigma, &alpha12).unwrap();
        for h in ctx12.link_verts(sigma).unwrap() {
            assert!(projected[h as usize].is_zero());
        }
    }
    assert!(gap_faces > 0);
}

#[test]
fn ck_routes_agree_across_systems_and_instances() {
    let posets = [
        build_poset(&["a", "b", "c", "d"], &[("b", "c"), ("c", "d")]).unwrap(),
        build_poset(&["a", "b", "c", "d"], &[("c", "d")]).unwrap(),
        build_poset(&["a", "b", "c"], &[("a", "b")]).unwrap(),
    ];
    for (pi, p) in posets.iter().enumerate() {
        for seed in [0u64, 1] {
            let cx = weighted_chain_complex(p, 90 + seed + pi as u64);
            for sys in [
                AbSystem::Coloring(trivial_coloring(&cx)),
                AbSystem::SRank(int(2)),
                AbSystem::SRank(rat(7, 3)),
            ] {
                let ctx = make_alpha_beta(&cx, sys).unwrap();
                let rep = ck_sequence(&ctx).unwrap();
                assert!(rep.routes_agree, "poset {pi} seed {seed}");
                assert!(rep.log_concave, "poset {pi} seed {seed}");
                assert!(rep.c.iter().all(|c| *c > int(0)));
            }
        }
    }

    let m = k4_matroid();
    let fc = flag_complex(&m);
    let card = cardinality_coloring(&fc, m.n()).unwrap();
    let ctx = make_alpha_beta(&fc, AbSystem::Coloring(card)).unwrap();
    let rep = ck_sequence(&ctx).unwrap();
    assert!(rep.routes_agree);
    assert!(rep.log_concave);
}

#[test]
fn ck_cardinality_ratios_match_the_moebius_sequence() {
    let m = k4_matroid();
    let fc = flag_complex(&m);
    let card = cardinality_coloring(&fc, m.n()).unwrap();
    let ctx = make_alpha_beta(&fc, AbSystem::Coloring(card)).unwrap();
    let rep = ck_sequence(&ctx).unwrap();
    let hrw = hrw_sequence(&m, &Caps::default()).unwrap();
    assert_eq!(hrw.c, vec![int(1), int(5), int(6)]);
    for k in 0..rep.c.len() {
        // c_k / c_0 = hrw_k / hrw_0 exactly
        assert_eq!(
            rep.c[k].clone() * hrw.c[0].clone(),
            hrw.c[k].clone() * rep.c[0].clone()
        );
    }
}

#[test]
fn spiked_colorings_approach_the_order_statistics() {
    // free element against a 3-chain; d = 3, 4 linear extensions
    let p = build_poset(&["a", "b", "c", "d"], &[("b", "c"), ("c", "d")]).unwrap();
    let lat = birkhoff_lattice(&p, &Caps::default()).unwrap();
    let cx = chain_complex(&lat, None).unwrap();
    let d = 3usize;
    let fact = |k: usize| -> i64 { (1..=k as i64).product() };

    // A = {a}: the free element is first in extension k+1 with count 1
    // for every k; A = {d}: counts (0, 0, 1, 3)
    let cases: [(u64, [i64; 4]); 2] = [(1 << 0, [1, 1, 1, 1]), (1 << 3, [0, 0, 1, 3])];
    for (a_mask, counts) in cases {
        let big_m = int(1_000_000);
        let spec = spiked_coloring(&cx, 4, a_mask, &big_m).unwrap();
        let ctx = make_alpha_beta(&cx, AbSystem::Coloring(spec)).unwrap();
        let rep = ck_sequence(&ctx).unwrap();
        assert!(rep.routes_agree);
        // compare c_k * k!(d-k)! against the counts, normalized so the
        // largest entry is 1; convergence is O(1/M)
        let scaled: Vec<Rat> = (0..=d)
            .map(|k| rep.c[k].clone() * int(fact(k) * fact(d - k)))
            .collect();
        let max_scaled = scaled.iter().cloned().max().unwrap();
        let max_count = *counts.iter().max().unwrap();
        let tol = rat(1, 1000);
        for k in 0..=d {
            let got = scaled[k].clone() / max_scaled.clone();
            let want = rat(counts[k], max_count);
            let diff = if got >= want { got - want.clone() } else { want.clone() - got };
            assert!(diff < tol, "k={k}: limit mismatch");
        }
    }
}

#[test]
fn cone_points_are_interior_and_interpolants_sit_on_the_boundary() {
    // d = 2: every cone entry is 2/9
    let p2 = build_poset(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
    let lat2 = birkhoff_lattice(&p2, &Caps::default()).unwrap();
    let cx2 = chain_complex(&lat2, None).unwrap();
    assert_eq!(cx2.d(), 2);
    let ctx2 = make_alpha_beta(&cx2, AbSystem::Coloring(trivial_coloring(&cx2))).unwrap();
    let cone2 = ctx2.cone_point(0).unwrap();
    for h in ctx2.link_verts(0).unwrap() {
        assert_eq!(cone2[h as usize], rat(2, 9));
    }

    // d = 3: parts get 3/16, 1/4, 3/16
    let cx = chain_complex(&four_facet_lattice(), None).unwrap();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let cone = ctx.cone_point(0).unwrap();
    for v in 0..cx.nv() as u32 {
        let expect = match cx.type_index(v) {
            1 | 3 => rat(3, 16),
            2 => rat(1, 4),
            _ => unreachable!(),
        };
        assert_eq!(cone[v as usize], expect);
    }
    assert!(ctx.is_pi_nonnegative(0, &cone, true).unwrap());

    // the interpolation vectors live on the cone boundary: projections
    // zero them out, so they pass weakly but not strictly
    let alpha: Vec<Rat> = (0..cx.nv() as u32)
        .map(|v| ctx.alpha(&Anchor::Bottom, &Anchor::Top, &Anchor::Vert(v)))
        .collect();
    let beta: Vec<Rat> = (0..cx.nv() as u32)
        .map(|v| ctx.beta(&Anchor::Bottom, &Anchor::Top, &Anchor::Vert(v)))
        .collect();
    for vvec in [&alpha, &beta] {
        assert!(ctx.is_pi_nonnegative(0, vvec, false).unwrap());
        assert!(!ctx.is_pi_nonnegative(0, vvec, true).unwrap());
    }
}

#[test]
fn srank_cones_fall_back_and_grow_with_s() {
    let cx = chain_complex(&twelve_chain_lattice(), None).unwrap();
    let trivial =
        make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let s_small = make_alpha_beta(&cx, AbSystem::SRank(rat(3, 2))).unwrap();
    let s_big = make_alpha_beta(&cx, AbSystem::SRank(int(3))).unwrap();

    let cone_t = trivial.cone_point(0).unwrap();
    let cone_s = s_small.cone_point(0).unwrap();
    assert_eq!(cone_t, cone_s, "s-systems reuse the part-index cone point");
    assert!(s_small.is_pi_nonnegative(0, &cone_s, true).unwrap());
    assert!(s_big.is_pi_nonnegative(0, &cone_s, true).unwrap());

    // cones only grow with s: anything admissible at small s stays
    // admissible at larger s; sample around the shared cone point
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut small_passes = 0;
    for _ in 0..40 {
        let t: Vec<Rat> = cone_s
            .iter()
            .map(|c| c.clone() + rat(rng.gen_range(-1..=1), rng.gen_range(40..=80)))
            .collect();
        if s_small.is_pi_nonnegative(0, &t, false).unwrap() {
            small_passes += 1;
            assert!(
                s_big.is_pi_nonnegative(0, &t, false).unwrap(),
                "cone containment violated"
            );
        }
    }
    assert!(small_passes > 0, "the sample should hit the small cone");
}

#[test]
fn certificates_granted_on_weighted_distributive_complexes() {
    let posets = [
        build_poset(&["a", "b", "c", "d"], &[("b", "c"), ("c", "d")]).unwrap(),
        build_poset(&["a", "b", "c", "d"], &[("c", "d")]).unwrap(),
        build_poset(&["a", "b", "c", "d"], &[("a", "b"), ("c", "d")]).unwrap(),
    ];
    for (pi, p) in posets.iter().enumerate() {
        for seed in [7u64, 8, 9] {
            let cx = weighted_chain_complex(p, 130 + seed * 10 + pi as u64);
            let ctx =
                make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
            let cert = lorentzian_certificate(&ctx).unwrap();
            assert!(cert.connected && cert.cone_ok && cert.granted);
            assert!(cert.witness.is_none());
            let colored = colored_toplink_check(&ctx).unwrap();
            assert!(colored.pass);
        }
    }

    // the order-reversing hypothesis matters: skewed multiplicative
    // weights push a middle link past the threshold
    let p = build_poset(&["a", "b", "c", "d"], &[("b", "c"), ("c", "d")]).unwrap();
    let lat = birkhoff_lattice(&p, &Caps::default()).unwrap();
    let psi: std::collections::HashMap<String, Rat> = [
        ("a".to_string(), int(4)),
        ("b".to_string(), int(1)),
        ("c".to_string(), rat(1, 10)),
        ("d".to_string(), int(100)),
    ]
    .into_iter()
    .collect();
    let weights: Vec<Rat> = (0..lat.len())
        .map(|f| lift_flat_weight(lat.base_labels(), lat.flat(f), &psi).unwrap())
        .collect();
    let cx = chain_complex(&lat, Some(&weights)).unwrap();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let colored = colored_toplink_check(&ctx).unwrap();
    assert!(!colored.pass, "skewed weights must fail the colored check");
    assert_eq!(colored.witness, Some(vec!["{b}".to_string()]));
    assert!(!lorentzian_certificate(&ctx).unwrap().granted);
}

#[test]
fn certificates_on_modular_lattices_follow_typicality() {
    // the Fano incidence lattice is modular, not distributive, typical
    let fano = fano_matroid();
    let lat = flat_lattice(&fano, &Caps::default()).unwrap();
    let class = classify_lattice(&lat).unwrap();
    assert!(!class.distributive);
    assert!(class.modular);
    assert!(class.typical_modular);
    let cx = chain_complex(&lat, None).unwrap();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let cert = lorentzian_certificate(&ctx).unwrap();
    assert!(cert.granted, "typical modular instances certify");

    // a modular lattice with an atypical rank-3 interval: three atoms
    // under one coatom, a second coatom over the middle atom only
    let base: Vec<String> = ["e0", "e1", "e2", "e3"].iter().map(|s| s.to_string()).collect();
    let flats = vec![
        (0b0000u64, 0usize),
        (0b0001, 1), // x0
        (0b0010, 1), // x1
        (0b0100, 1), // x2
        (0b0111, 2), // y0 over x0, x1, x2
        (0b1010, 2), // y1 over x1 only
        (0b1111, 3),
    ];
    let lat = RankedLattice::from_flats(base, flats).unwrap();
    let class = classify_lattice(&lat).unwrap();
    assert!(class.modular);
    assert!(!class.typical_modular);
    let cx = chain_complex(&lat, None).unwrap();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let cert = lorentzian_certificate(&ctx).unwrap();
    assert!(cert.connected && cert.cone_ok);
    assert!(!cert.granted, "atypical interval must be refused");
    assert_eq!(cert.witness, Some(vec![]), "the empty face is the witness");
    assert_eq!(cert.quadratics.len(), 1);
    assert_eq!(cert.quadratics[0].positive_count, 2);
    let colored = colored_toplink_check(&ctx).unwrap();
    assert!(!colored.pass);
}

#[test]
fn certificates_granted_on_matroid_flag_complexes() {
    for m in [
        k4_matroid(),
        Matroid::graphic(4, &[(0, 1), (1, 2), (2, 3)]).unwrap(),
        Matroid::graphic(5, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)])
            .unwrap(),
    ] {
        let fc = flag_complex(&m);
        let card = cardinality_coloring(&fc, m.n()).unwrap();
        let ctx = make_alpha_beta(&fc, AbSystem::Coloring(card)).unwrap();
        let cert = lorentzian_certificate(&ctx).unwrap();
        assert!(cert.granted, "rank-{} flag complex", fc.d());
    }
}

#[test]
fn matroid_top_links_have_unique_joins() {
    // in every adjacent codim-2 link of a flag complex, two lower flats
    // lie under exactly one common upper flat, so the 0/1 incidence
    // satisfies A A^T = J + diag(deg - 1)
    for m in [
        k4_matroid(),
        Matroid::graphic(5, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)])
            .unwrap(),
    ] {
        let fc = flag_complex(&m);
        let ctx = make_alpha_beta(&fc, AbSystem::Coloring(trivial_coloring(&fc))).unwrap();
        let mut tested = 0;
        for sigma in ctx.codim2_faces() {
            if fc.classify_contiguity(sigma).unwrap().link_contiguous.is_none() {
                continue;
            }
            let verts = ctx.link_verts(sigma).unwrap();
            let low_part = verts.iter().map(|&v| fc.type_index(v)).min().unwrap();
            let low: Vec<u32> =
                verts.iter().copied().filter(|&v| fc.type_index(v) == low_part).collect();
            let high: Vec<u32> =
                verts.iter().copied().filter(|&v| fc.type_index(v) != low_part).collect();
            let edge = |f: u32, g: u32| {
                !ctx.prob(sigma | (1u128 << f) | (1u128 << g)).is_zero()
            };
            let deg = |f: u32| high.iter().filter(|&&g| edge(f, g)).count();
            for (i, &f1) in low.iter().enumerate() {
                for &f2 in &low[i + 1..] {
                    let common =
                        high.iter().filter(|&&g| edge(f1, g) && edge(f2, g)).count();
                    assert_eq!(common, 1, "two flats join uniquely");
                }
            }
            for (i, &g1) in high.iter().enumerate() {
                for &g2 in &high[i + 1..] {
                    let common =
                        low.iter().filter(|&&f| edge(f, g1) && edge(f, g2)).count();
                    assert!(common <= 1, "two upper flats meet in at most one");
                }
            }
            // A A^T spelled out
            for (i, &f1) in low.iter().enumerate() {
                for (j, &f2) in low.iter().enumerate() {
                    let prod: usize = high
                        .iter()
                        .filter(|&&g| edge(f1, g) && edge(f2, g))
                        .count();
                    let expect = if i == j { deg(f1) } else { 1 };
                    assert_eq!(prod, expect);
                }
            }
            tested += 1;
        }
        assert!(tested > 0);
    }
}

#[test]
fn ell_suite_and_frozen_cphi_values() {
    let cx = chain_complex(&twelve_chain_lattice(), None).unwrap();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let ms: Vec<Rat> = vec![
        rat(1, 2),
        int(1),
        rat(3, 2),
        int(2),
        rat(5, 2),
        int(3),
        rat(7, 2),
    ];
    let rep = ell_identity_suite(&ctx, &ms).unwrap();
    assert!(rep.pass);
    assert!(rep.relations_checked > 0 && rep.mixed_checked > 0 && rep.support_checked > 0);

    let ctx_s = make_alpha_beta(&cx, AbSystem::SRank(int(2))).unwrap();
    let rep_s = ell_identity_suite(&ctx_s, &[int(1), int(2), int(3)]).unwrap();
    assert!(rep_s.pass);

    // d = 3, occupied level 2: both gaps contribute 1/2
    assert_eq!(c_phi(&EllForm::Diff, 3, &[2]).unwrap(), rat(1, 4));
    // nothing occupied: 1/(d+1)
    assert_eq!(c_phi(&EllForm::Diff, 3, &[]).unwrap(), rat(1, 4));
    assert_eq!(c_phi(&EllForm::Diff, 4, &[]).unwrap(), rat(1, 5));
    // s-form at s = 2: each enclosing gap gives 1/[2]_s = 2/5
    assert_eq!(c_phi(&EllForm::S(int(2)), 3, &[2]).unwrap(), rat(4, 25));
}

#[test]
fn ell_vectors_near_the_anchors_are_scaled_interpolants() {
    let cx = chain_complex(&twelve_chain_lattice(), None).unwrap();
    let ctx = make_alpha_beta(&cx, AbSystem::Coloring(trivial_coloring(&cx))).unwrap();
    let d = cx.d();
    let half = rat(1, 2);

    let low = ell_vector(&cx, &EllForm::Diff, &half, 0, d + 1).unwrap();
    let high =
        ell_vector(&cx, &EllForm::Diff, &(int(d as i64) + half.clone()), 0, d + 1)
            .unwrap();
    for v in 0..cx.nv() as u32 {
        let a = ctx.alpha(&Anchor::Bottom, &Anchor::Top, &Anchor::Vert(v));
        let b = ctx.beta(&Anchor::Bottom, &Anchor::Top, &Anchor::Vert(v));
        assert_eq!(low[v as usize], b * half.clone());
        assert_eq!(high[v as usize], a * half.clone());
    }
}

#[test]
fn coefficient_table_is_part_consistent() {
    // the extracted coefficients only depend on the anchors and parts,
    // never on which face produced them
    let cx = lowerbound_complex();
    let ctx = make_alpha_beta(&cx, AbSystem::SRank(rat(5, 2))).unwrap();
    let table = pi_table(&ctx).unwrap();
    let mut by_parts: HashMap<(usize, usize, usize, usize), Rat> = HashMap::new();
    for ((lo, f, hi, h), c) in &table.coeff {
        let key = (
            match lo {
                Anchor::Bottom => 0,
                Anchor::Vert(v) => cx.type_index(*v),
                Anchor::Top => cx.d() + 1,
            },
            cx.type_index(*f),
            match hi {
                Anchor::Bottom => 0,
                Anchor::Vert(v) => cx.type_index(*v),
                Anchor::Top => cx.d() + 1,
            },
            cx.type_index(*h),
        );
        if let Some(prev) = by_parts.get(&key) {
            assert_eq!(prev, c, "rank systems are functions of parts");
        } else {
            by_parts.insert(key, c.clone());
        }
    }
}
