use std::sync::Arc;

use conespec::algebra::{find_isomorphism, homs};
use conespec::context::{Localization, SpectralContext};
use conespec::corpus::{self, arc};
use conespec::hypercover::{
    h0, is_opcover, kernel_hyperopcover, opcovers, refinement_map, split_cover_check, stabilized_h0, Hyperopcover,
    Opcover,
};
use conespec::{Error, FiniteAlgebra};

use SpectralContext::{Deitmar, Domain, Zariski};

fn iso(a: &Arc<FiniteAlgebra>, b: FiniteAlgebra) -> bool {
    find_isomorphism(a, &arc(b)).is_some()
}

fn algebras(ctx: SpectralContext, max: usize) -> Vec<(String, Arc<FiniteAlgebra>)> {
    let list = match ctx {
        Deitmar => corpus::monoid_corpus(),
        _ => corpus::ring_corpus(),
    };
    list.into_iter().filter(|(_, a)| a.len() <= max).map(|(n, a)| (n, arc(a))).collect()
}

/// The finite localization of `r` whose target is isomorphic to `t`.
fn loc_onto(ctx: SpectralContext, r: &Arc<FiniteAlgebra>, t: FiniteAlgebra) -> Localization {
    let t = arc(t);
    ctx.finite_localizations(r)
        .unwrap()
        .into_iter()
        .find(|k| find_isomorphism(k.target(), &t).is_some())
        .expect("no such localization")
}

fn z6_cover() -> Opcover {
    let r = arc(corpus::zmod(6));
    let a = loc_onto(Zariski, &r, corpus::zmod(2));
    let b = loc_onto(Zariski, &r, corpus::zmod(3));
    Opcover::new(Zariski, &r, vec![a, b]).unwrap()
}

#[test]
fn z6_covers() {
    let r = arc(corpus::zmod(6));
    let half = Opcover::unchecked(&r, vec![loc_onto(Zariski, &r, corpus::zmod(2))]).unwrap();
    assert!(is_opcover(Zariski, &z6_cover()).unwrap());
    assert!(!is_opcover(Zariski, &half).unwrap());
    assert!(is_opcover(Zariski, &Opcover::trivial(&r)).unwrap());
    assert!(matches!(Opcover::new(Zariski, &r, half.components().to_vec()), Err(Error::Input(_))));
}

#[test]
fn z6_cech_overlaps() {
    let k = kernel_hyperopcover(Zariski, z6_cover()).unwrap();
    let sizes: Vec<((usize, usize), usize)> = k.level1().iter().map(|o| (o.pair, o.pushout.apex.len())).collect();
    assert_eq!(sizes, vec![((0, 0), 2), ((0, 1), 1), ((1, 1), 3)]);
    // oracle: a pushout of quotients is the quotient by the joined kernels
    for o in k.level1() {
        let (i, j) = o.pair;
        let (ki, kj) = (&k.level0().components()[i], &k.level0().components()[j]);
        let joined = ki.key().join(&kj.key(), k.base());
        assert_eq!(joined.num_classes(), o.pushout.apex.len());
        assert_eq!(o.cover.len(), 1);
        assert!(o.cover.components()[0].map().is_bijective());
    }
    let h = h0(&k).unwrap();
    assert!(iso(h.apex(), corpus::zmod(6)));
    assert!(h.from_base.is_bijective());
}

#[test]
fn identity_cover_is_trivial() {
    for ctx in SpectralContext::ALL {
        for (name, r) in algebras(ctx, 8) {
            let k = kernel_hyperopcover(ctx, Opcover::trivial(&r)).unwrap();
            assert_eq!(k.level1().len(), 1);
            assert!(k.level1()[0].pushout.left.is_bijective(), "{name}");
            let h = h0(&k).unwrap();
            assert!(h.from_base.is_bijective(), "{ctx} {name}");
        }
    }
}

#[test]
fn sierpinski_monoid_cover() {
    let r = arc(corpus::idempotent_pair());
    let inv = loc_onto(Deitmar, &r, corpus::trivial_monoid());
    let c = Opcover::new(Deitmar, &r, vec![Localization::identity(&r), inv]).unwrap();
    let k = kernel_hyperopcover(Deitmar, c).unwrap();
    let sizes: Vec<usize> = k.level1().iter().map(|o| o.pushout.apex.len()).collect();
    assert_eq!(sizes, vec![2, 1, 1]);
    let h = h0(&k).unwrap();
    assert!(iso(h.apex(), corpus::idempotent_pair()));
    assert!(h.from_base.is_bijective());
    // the inverted component alone misses the closed point
    let alone = Opcover::unchecked(&r, vec![k.level0().components()[1].clone()]).unwrap();
    assert!(!is_opcover(Deitmar, &alone).unwrap());
}

#[test]
fn split_covers() {
    let z6 = arc(corpus::zmod(6));
    let with_id =
        Opcover::new(Zariski, &z6, vec![Localization::identity(&z6), loc_onto(Zariski, &z6, corpus::zmod(3))]).unwrap();
    let k = kernel_hyperopcover(Zariski, with_id).unwrap();
    assert!(split_cover_check(Zariski, &k).unwrap().is_bijective());

    let z4 = arc(corpus::zmod(4));
    let iso_loc = ctx_iso_loc(Zariski, &z4);
    let k = kernel_hyperopcover(Zariski, Opcover::new(Zariski, &z4, vec![iso_loc]).unwrap()).unwrap();
    assert!(split_cover_check(Zariski, &k).is_ok());

    let e = arc(corpus::idempotent_pair());
    let c =
        Opcover::new(Deitmar, &e, vec![Localization::identity(&e), loc_onto(Deitmar, &e, corpus::trivial_monoid())])
            .unwrap();
    assert!(split_cover_check(Deitmar, &kernel_hyperopcover(Deitmar, c).unwrap()).is_ok());

    // not split
    assert!(matches!(
        split_cover_check(Zariski, &kernel_hyperopcover(Zariski, z6_cover()).unwrap()),
        Err(Error::Input(_))
    ));
    let d = arc(corpus::truncated_poly(2, 2));
    let k = kernel_hyperopcover(Domain, Opcover::trivial(&d)).unwrap();
    assert!(matches!(split_cover_check(Domain, &k), Err(Error::Input(_))));
}

fn ctx_iso_loc(ctx: SpectralContext, r: &Arc<FiniteAlgebra>) -> Localization {
    ctx.finite_localizations(r).unwrap().into_iter().find(|k| k.map().is_bijective()).unwrap()
}

#[test]
fn split_covers_over_corpus() {
    for ctx in [Zariski, Deitmar] {
        for (name, r) in algebras(ctx, 12) {
            for c in opcovers(ctx, &r, 2).unwrap() {
                if c.components().iter().any(|k| k.map().is_bijective()) {
                    let k = kernel_hyperopcover(ctx, c).unwrap();
                    split_cover_check(ctx, &k).unwrap_or_else(|e| panic!("{ctx} {name}: {e}"));
                }
            }
        }
    }
}

#[test]
fn enumerated_covers_cover() {
    for ctx in SpectralContext::ALL {
        for (name, r) in algebras(ctx, 12) {
            let locs = ctx.finite_localizations(&r).unwrap();
            let covers = opcovers(ctx, &r, 2).unwrap();
            assert!(!covers.is_empty() || r.is_trivial() && ctx != Deitmar, "{ctx} {name}");
            for c in &covers {
                assert!(is_opcover(ctx, c).unwrap(), "{ctx} {name}");
            }
            // brute force over pairs: exactly the covering ones are listed
            let mut expected = 0;
            for i in 0..locs.len() {
                for j in i..locs.len() {
                    let fam = if i == j { vec![locs[i].clone()] } else { vec![locs[i].clone(), locs[j].clone()] };
                    if is_opcover(ctx, &Opcover::unchecked(&r, fam).unwrap()).unwrap() {
                        expected += 1;
                    }
                }
            }
            assert_eq!(covers.len(), expected, "{ctx} {name}");
        }
    }
}

#[test]
fn zariski_cech_h0_recovers_the_ring() {
    for (name, r) in algebras(Zariski, 18) {
        for c in opcovers(Zariski, &r, 3).unwrap() {
            let n = c.len();
            let h = h0(&kernel_hyperopcover(Zariski, c).unwrap()).unwrap();
            assert!(h.from_base.is_bijective(), "{name}, cover of {n}");
        }
    }
}

#[test]
fn pushouts_of_covers_cover() {
    for ctx in SpectralContext::ALL {
        let small = algebras(ctx, 6);
        for (rn, r) in &small {
            let covers = opcovers(ctx, r, 2).unwrap();
            for (sn, s) in &small {
                for f in homs(r, s) {
                    for c in &covers {
                        let (pushed, maps) = c.push_forward(ctx, &f).unwrap();
                        assert!(is_opcover(ctx, &pushed).unwrap(), "{ctx} {rn} -> {sn}");
                        for (k, (l, m)) in c.components().iter().zip(pushed.components().iter().zip(&maps)) {
                            // the square commutes
                            assert_eq!(k.map().then(m).unwrap().map(), f.then(l.map()).unwrap().map());
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn compositions_of_covers_cover() {
    for ctx in SpectralContext::ALL {
        for (name, r) in algebras(ctx, 12) {
            for c in opcovers(ctx, &r, 2).unwrap() {
                let refinements: Vec<Opcover> = c
                    .components()
                    .iter()
                    .map(|k| {
                        let covers = opcovers(ctx, k.target(), 2).unwrap();
                        covers.into_iter().last().unwrap_or_else(|| Opcover::trivial(k.target()))
                    })
                    .collect();
                let composed = c.compose(&refinements).unwrap();
                assert!(is_opcover(ctx, &composed).unwrap(), "{ctx} {name}");
                assert!(composed.refines(&c));
            }
        }
    }
}

#[test]
fn h0_is_contravariant_along_refinement() {
    for ctx in SpectralContext::ALL {
        for (name, r) in algebras(ctx, 12) {
            let covers = opcovers(ctx, &r, 2).unwrap();
            let cech: Vec<Hyperopcover> = covers.iter().map(|c| kernel_hyperopcover(ctx, c.clone()).unwrap()).collect();
            for (fine, f) in covers.iter().zip(&cech) {
                for (coarse, g) in covers.iter().zip(&cech) {
                    let m = refinement_map(f, g).unwrap();
                    assert_eq!(m.is_some(), fine.refines(coarse), "{ctx} {name}");
                    if let Some(m) = m {
                        let under = h0(g).unwrap().from_base.then(&m).unwrap();
                        assert_eq!(under.map(), h0(f).unwrap().from_base.map(), "{ctx} {name}");
                    }
                }
            }
            stabilized_h0(ctx, &r, &covers).unwrap();
        }
    }
}

#[test]
fn level1_must_cover() {
    let r = arc(corpus::zmod(6));
    let bad = Hyperopcover::with_level1(Zariski, z6_cover(), |_, po| Opcover::unchecked(&po.apex, vec![]));
    // the empty family covers only the zero overlap
    assert!(matches!(bad, Err(Error::Input(_))));
    let ok =
        Hyperopcover::with_level1(Zariski, Opcover::trivial(&r), |_, po| Opcover::finest(Zariski, &po.apex)).unwrap();
    assert!(h0(&ok).unwrap().from_base.is_bijective());
}

#[test]
fn jointly_monic_quotient_families_cover_reduced_rings() {
    let mut checked = 0;
    for (name, r) in algebras(Domain, 18) {
        if !conespec::reduction::is_mono_reduced(Domain, &r).unwrap() {
            continue;
        }
        let locs = Domain.finite_localizations(&r).unwrap();
        let n = locs.len();
        for mask in 1u32..(1 << n) {
            if mask.count_ones() > 3 {
                continue;
            }
            let fam: Vec<Localization> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| locs[i].clone()).collect();
            let mut labels = vec![Vec::new(); r.len()];
            for k in &fam {
                for (a, l) in labels.iter_mut().enumerate() {
                    l.push(k.map().apply(a));
                }
            }
            let mut seen = std::collections::HashSet::new();
            if !labels.into_iter().all(|l| seen.insert(l)) {
                continue;
            }
            let c = Opcover::unchecked(&r, fam).unwrap();
            assert!(is_opcover(Domain, &c).unwrap(), "{name}");
            checked += 1;
        }
    }
    assert!(checked > 20);
}
