use std::sync::Arc;

use conespec::algebra::{equalizer, find_isomorphism, hom_under, homs, pushout, DEFAULT_SIZE_BOUND};
use conespec::context::{CellOrder, SpectralContext};
use conespec::corpus::{self, arc};
use conespec::spectrum::{
    ap_maps, build_spec, distinguished_open, members, open_embedding_check, spec_map, APMap, Presheaf, Sheaf,
    SpectralSpace, Topology,
};
use conespec::{FiniteAlgebra, Hom};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

mod common;

use common::{algebras, corpus_sheaves, perturbed, small};
use SpectralContext::{Deitmar, Zariski};

fn iso(a: &Arc<FiniteAlgebra>, b: FiniteAlgebra) -> bool {
    find_isomorphism(a, &arc(b)).is_some()
}

#[test]
fn spec_z6_is_two_discrete_points() {
    let r = arc(corpus::zmod(6));
    let s = build_spec(Zariski, &r).unwrap();
    assert_eq!(s.points(), 2);
    assert_eq!(s.topology().opens(), &[0, 1, 2, 3]);
    assert!(iso(s.stalk(0), corpus::zmod(2)));
    assert!(iso(s.stalk(1), corpus::zmod(3)));
    assert!(iso(s.global_sections(), corpus::zmod(6)));
    assert!(s.counit().unwrap().is_bijective());
    assert_eq!(s.labels(), &["(2)", "(3)"]);
}

#[test]
fn spec_local_rings_have_one_point() {
    for r in [corpus::zmod(4), corpus::truncated_poly(2, 3), corpus::gf4()] {
        let r = arc(r);
        let s = build_spec(Zariski, &r).unwrap();
        assert_eq!(s.points(), 1);
        assert!(find_isomorphism(s.global_sections(), &r).is_some());
    }
    let s = build_spec(Zariski, &arc(corpus::zmod(12))).unwrap();
    assert_eq!(s.points(), 2);
    assert!(iso(s.stalk(0), corpus::zmod(3)));
    assert!(iso(s.stalk(1), corpus::zmod(4)));
    assert!(s.counit().unwrap().is_bijective());
}

#[test]
fn spec_idempotent_pair_is_sierpinski() {
    let m = arc(corpus::idempotent_pair());
    let s = build_spec(Deitmar, &m).unwrap();
    assert_eq!(s.labels(), &["∅", "(e)"]);
    assert_eq!(s.topology().opens(), &[0b00, 0b01, 0b11]);
    assert_eq!(s.sheaf().section(0b01).len(), 1);
    assert_eq!(s.stalk(0).len(), 1);
    assert_eq!(s.stalk(1).len(), 2);
    assert!(find_isomorphism(s.global_sections(), &m).is_some());
    assert!(s.counit().unwrap().is_bijective());
}

#[test]
fn spec_of_zero_ring_is_empty() {
    let s = build_spec(Zariski, &arc(corpus::zmod(1))).unwrap();
    assert_eq!(s.points(), 0);
    assert_eq!(s.global_sections().len(), 1);
}

#[test]
fn distinguished_opens_by_hom_search() {
    for ctx in SpectralContext::ALL {
        for (name, r) in small(ctx, 12) {
            let s = build_spec(ctx, &r).unwrap();
            let aff = s.affine().unwrap();
            for (k, m) in &aff.localizations {
                let by_search = aff
                    .forms
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| hom_under(k.map(), p.map()).is_some())
                    .fold(0u64, |a, (i, _)| a | 1 << i);
                assert_eq!(*m, by_search, "{ctx} {name}");
                assert_eq!(distinguished_open(&s, k), *m);
                assert!(s.topology().is_open(*m));
            }
            let full = s.topology().full();
            assert!(aff.localizations.iter().any(|(k, m)| *m == full && k.steps().is_empty()));
        }
    }
    let s = build_spec(Zariski, &arc(corpus::zmod(6))).unwrap();
    let aff = s.affine().unwrap();
    let invert3 = aff.localizations.iter().find(|(k, _)| k.target().len() == 2).unwrap();
    assert_eq!(invert3.1, 0b01);
    let zero = aff.localizations.iter().find(|(k, _)| k.target().len() == 1).unwrap();
    assert_eq!(zero.1, 0);
}

#[test]
fn intersections_of_distinguished_opens_are_pushouts() {
    for ctx in SpectralContext::ALL {
        for (name, r) in small(ctx, 12) {
            let s = build_spec(ctx, &r).unwrap();
            let locs = &s.affine().unwrap().localizations;
            for (k, mk) in locs {
                for (l, ml) in locs {
                    let po = pushout(k.map(), l.map(), DEFAULT_SIZE_BOUND).unwrap();
                    let diag = k.map().then(&po.left).unwrap();
                    let m = s
                        .affine()
                        .unwrap()
                        .forms
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| diag.kernel().refines(&p.key()))
                        .fold(0u64, |a, (i, _)| a | 1 << i);
                    assert_eq!(m, mk & ml, "{ctx} {name}");
                }
            }
        }
    }
}

#[test]
fn stalks_are_local_forms_and_topology_is_closed() {
    for ctx in SpectralContext::ALL {
        for (name, r) in algebras(ctx) {
            let s = build_spec(ctx, &r).unwrap();
            let aff = s.affine().unwrap();
            let t = s.topology();
            for (x, p) in aff.forms.iter().enumerate() {
                assert!(find_isomorphism(s.stalk(x), p.target()).is_some(), "{ctx} {name}");
            }
            for &a in t.opens() {
                for &b in t.opens() {
                    assert!(t.is_open(a | b) && t.is_open(a & b));
                }
            }
            // every cover of the whole space by basis opens has a finite subcover: the cover itself
            let basis: Vec<u64> = aff.basis.iter().map(|(m, _)| *m).collect();
            assert_eq!(basis.iter().fold(0, |a, b| a | b), t.full());
            assert!(s.sheaf().presheaf().is_sheaf().unwrap());
            assert!(s.sheaf().presheaf().validate().is_ok());
        }
    }
}

#[test]
fn zariski_spectra_are_fixed_points_with_sheaf_canonical_presheaf() {
    for (name, r) in algebras(Zariski) {
        let s = build_spec(Zariski, &r).unwrap();
        assert!(s.counit().unwrap().is_bijective(), "{name}");
        let aff = s.affine().unwrap();
        assert!(aff.canonical_is_sheaf, "{name}");
        assert!(aff.canonical.validate().is_ok());
    }
}

fn spaces(ctx: SpectralContext, max: usize) -> Vec<(Arc<FiniteAlgebra>, Arc<SpectralSpace>)> {
    small(ctx, max).into_iter().map(|(_, r)| (r.clone(), Arc::new(build_spec(ctx, &r).unwrap()))).collect()
}

#[test]
fn spec_map_examples() {
    let z6 = arc(corpus::zmod(6));
    let z2 = arc(corpus::zmod(2));
    let z3 = arc(corpus::zmod(3));
    let s6 = Arc::new(build_spec(Zariski, &z6).unwrap());
    let s2 = Arc::new(build_spec(Zariski, &z2).unwrap());
    let s3 = Arc::new(build_spec(Zariski, &z3).unwrap());
    let f = Hom::new(z6.clone(), z2.clone(), vec![0, 1, 0, 1, 0, 1]).unwrap();
    let m = spec_map(&s2, &s6, &f).unwrap();
    assert_eq!(m.points(), &[0]);
    assert!(m.stalk_map(0).is_bijective());
    let g = Hom::new(z6.clone(), z3, vec![0, 1, 2, 0, 1, 2]).unwrap();
    assert_eq!(spec_map(&s3, &s6, &g).unwrap().points(), &[1]);
    let id = spec_map(&s6, &s6, &Hom::identity(&z6)).unwrap();
    assert!(id.same_as(&APMap::identity(&s6)));
}

#[test]
fn spec_is_functorial_and_counit_is_natural() {
    for ctx in SpectralContext::ALL {
        let sp = spaces(ctx, 8);
        for (r, x) in &sp {
            for (s, y) in &sp {
                for f in homs(r, s) {
                    let mf = spec_map(y, x, &f).unwrap();
                    // Γ(Spec f) ∘ ε_R = ε_S ∘ f
                    let gamma = mf.sheaf_component(x.topology().full()).unwrap();
                    let left = x.counit().unwrap().then(&gamma).unwrap();
                    let right = f.then(y.counit().unwrap()).unwrap();
                    assert_eq!(left.map(), right.map());
                    for (t, z) in &sp {
                        if t.len() > 6 {
                            continue;
                        }
                        for g in homs(s, t) {
                            let mg = spec_map(z, y, &g).unwrap();
                            let both = spec_map(z, x, &f.then(&g).unwrap()).unwrap();
                            assert!(mg.then(&mf).unwrap().same_as(&both));
                        }
                    }
                }
            }
        }
    }
}

fn one_point(ctx: SpectralContext, p: &Arc<FiniteAlgebra>) -> Arc<SpectralSpace> {
    let t = Arc::new(Topology::discrete(1).unwrap());
    let sheaf = Sheaf::from_stalks(t, ctx.kind(), vec![p.clone()], &|_, _| unreachable!()).unwrap();
    Arc::new(SpectralSpace::new(ctx, vec!["*".into()], sheaf).unwrap())
}

// Maps from a one-point space with local stalk P into Spec R are homs R → P.
fn theta(ctx: SpectralContext, pt: &Arc<SpectralSpace>, x: &Arc<SpectralSpace>, g: &Hom) -> APMap {
    let fz = ctx.factorize(g, CellOrder::Forward).unwrap();
    let forms = &x.affine().unwrap().forms;
    let i = forms.iter().position(|p| p.key() == fz.localization.key()).unwrap();
    let stalk = conespec::context::descend(g, forms[i].map()).unwrap();
    APMap::new(pt.clone(), x.clone(), vec![i], vec![stalk]).unwrap()
}

#[test]
fn points_with_local_stalks_classify_homs() {
    for ctx in SpectralContext::ALL {
        let sp = spaces(ctx, 8);
        let locals: Vec<Arc<FiniteAlgebra>> =
            small(ctx, 8).into_iter().map(|(_, a)| a).filter(|a| ctx.is_local(a)).collect();
        for p in &locals {
            let pt = one_point(ctx, p);
            for (r, x) in &sp {
                let maps = ap_maps(&pt, x).unwrap();
                let hs = homs(r, p);
                assert_eq!(maps.len(), hs.len(), "{ctx}");
                for g in &hs {
                    let th = theta(ctx, &pt, x, g);
                    assert_eq!(maps.iter().filter(|m| m.same_as(&th)).count(), 1);
                }
                for (s, y) in sp.iter().filter(|(s, _)| s.len() <= 4) {
                    for f in homs(r, s) {
                        let mf = spec_map(y, x, &f).unwrap();
                        for h in homs(s, p) {
                            let lhs = theta(ctx, &pt, x, &f.then(&h).unwrap());
                            let rhs = theta(ctx, &pt, y, &h).then(&mf).unwrap();
                            assert!(lhs.same_as(&rhs));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn localizations_are_open_embeddings() {
    for ctx in SpectralContext::ALL {
        for (name, r) in small(ctx, 12) {
            let s = Arc::new(build_spec(ctx, &r).unwrap());
            for (k, _) in &s.affine().unwrap().localizations {
                assert!(open_embedding_check(&s, k).unwrap(), "{ctx} {name}");
            }
        }
    }
}

#[test]
fn pushouts_of_localizations_give_fibre_products_of_points() {
    for ctx in SpectralContext::ALL {
        for (_, r) in small(ctx, 12) {
            let s = Arc::new(build_spec(ctx, &r).unwrap());
            let locs = &s.affine().unwrap().localizations;
            for (k, mk) in locs.iter().take(6) {
                for (l, ml) in locs.iter().take(6) {
                    let po = pushout(k.map(), l.map(), DEFAULT_SIZE_BOUND).unwrap();
                    let sp = Arc::new(build_spec(ctx, &po.apex).unwrap());
                    let diag = k.map().then(&po.left).unwrap();
                    let m = spec_map(&sp, &s, &diag).unwrap();
                    let image = m.points().iter().fold(0u64, |a, &p| a | 1 << p);
                    let mut pts = m.points().to_vec();
                    pts.dedup();
                    assert_eq!(pts.len(), m.points().len());
                    assert_eq!(image, mk & ml);
                }
            }
        }
    }
}

fn check_sheafification(p: &Presheaf) {
    p.validate().unwrap();
    let sh = p.sheafify().unwrap();
    assert_eq!(sh.passes, if p.is_separated() { 1 } else { 2 });
    assert!(sh.sheaf.is_sheaf().unwrap());
    let t = p.topology();
    for x in 0..t.points() {
        let i = t.index_of(t.minimal_open(x)).unwrap();
        assert!(sh.unit[i].is_bijective(), "stalk changed");
    }
    let again = sh.sheaf.sheafify().unwrap();
    assert!(again.unit.iter().all(|h| h.is_bijective()), "not idempotent");
    for &w in t.opens() {
        for cover in t.irredundant_covers(w, t.opens()) {
            assert!(sh.sheaf.satisfies_cover(w, &cover).unwrap());
        }
    }
}

#[test]
fn randomized_presheaves_sheafify_cleanly() {
    let sheaves = corpus_sheaves();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for seed in 0..20u64 {
        let base = &sheaves[rng.gen_range(0..sheaves.len())];
        let p = perturbed(base, seed).unwrap();
        check_sheafification(&p);
    }
}

#[test]
fn sheaves_are_unchanged_by_sheafification() {
    for s in corpus_sheaves() {
        let sh = s.presheaf().sheafify().unwrap();
        assert_eq!(sh.passes, 1);
        assert!(sh.unit.iter().all(|h| h.is_bijective()));
    }
}

#[test]
fn too_few_global_sections_are_filled_in() {
    let f2 = corpus::zmod(2);
    let r = arc(corpus::ring_product(&[f2.clone(), f2.clone(), f2]));
    let s = build_spec(Zariski, &r).unwrap();
    let p = s.sheaf().presheaf();
    let t = p.topology().clone();
    let full = t.full();
    // keep only the global sections agreeing on the first two points
    let a = p.restriction(full, t.minimal_open(0));
    let b = p.restriction(full, t.minimal_open(1));
    let to_first = find_isomorphism(a.target(), b.target()).unwrap();
    let (sub, inc) = equalizer(&a.then(&to_first).unwrap(), b).unwrap();
    assert_eq!(sub.len(), 4);
    let top = t.index_of(full).unwrap();
    let sections: Vec<Arc<FiniteAlgebra>> =
        (0..t.len()).map(|i| if i == top { sub.clone() } else { p.section_at(i).clone() }).collect();
    let bad = Presheaf::new(t.clone(), p.kind(), sections, |i, j| match (i == top, j == top) {
        (true, true) => Ok(Hom::identity(&sub)),
        (true, false) => inc.then(p.restriction_at(i, j)),
        _ => Ok(p.restriction_at(i, j).clone()),
    })
    .unwrap();
    assert!(bad.is_separated());
    assert!(!bad.is_sheaf().unwrap());
    assert!(!bad.satisfies_cover(full, &[1, 2, 4]).unwrap());
    let sh = bad.sheafify().unwrap();
    assert_eq!(sh.passes, 1);
    assert_eq!(sh.sheaf.section(full).len(), 8);
    check_sheafification(&bad);
}

#[test]
fn restriction_to_an_open_is_the_spectrum_of_the_localization() {
    let r = arc(corpus::zmod(12));
    let s = build_spec(Zariski, &r).unwrap();
    let (sub, pts) = s.restrict(0b10).unwrap();
    assert_eq!(pts, vec![1]);
    assert!(iso(sub.global_sections(), corpus::zmod(4)));
    assert_eq!(members(s.topology().full()).count(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_topologies_are_topologies(gens in prop::collection::vec(0u64..64, 0..5)) {
        let t = Topology::generated(6, &gens).unwrap();
        for &a in t.opens() {
            for &b in t.opens() {
                prop_assert!(t.is_open(a | b) && t.is_open(a & b));
            }
        }
        for &g in &gens {
            prop_assert!(t.is_open(g));
        }
        for x in 0..6 {
            let u = t.minimal_open(x);
            prop_assert!(t.is_open(u) && u >> x & 1 == 1);
            prop_assert!(t.opens().iter().all(|&v| v >> x & 1 == 0 || u & !v == 0));
        }
    }

    #[test]
    fn random_presheaves_sheafify(which in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let sheaves = corpus_sheaves();
        let base = &sheaves[which.index(sheaves.len())];
        check_sheafification(&perturbed(base, seed).unwrap());
    }
}
