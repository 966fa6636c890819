use std::sync::Arc;

use conespec::algebra::{find_isomorphism, homs, iso_under, prime_ideals};
use conespec::context::{Branch, CellDatum, CellOrder, SpectralContext};
use conespec::corpus::{self, arc};
use conespec::{Error, FiniteAlgebra, Hom};
use proptest::prelude::*;

use SpectralContext::{Deitmar, Domain, Zariski};

fn algebras(ctx: SpectralContext) -> Vec<(String, Arc<FiniteAlgebra>)> {
    let list = match ctx {
        Deitmar => corpus::monoid_corpus(),
        _ => corpus::ring_corpus(),
    };
    list.into_iter().map(|(n, a)| (n, arc(a))).collect()
}

fn small(ctx: SpectralContext, max: usize) -> Vec<(String, Arc<FiniteAlgebra>)> {
    algebras(ctx).into_iter().filter(|(_, a)| a.len() <= max).collect()
}

// Non-units closed under addition.
fn local_ring_oracle(r: &FiniteAlgebra) -> bool {
    let nu: Vec<usize> = (0..r.len()).filter(|&x| !r.is_unit(x)).collect();
    !r.is_trivial() && nu.iter().all(|&a| nu.iter().all(|&b| nu.contains(&r.add(a, b))))
}

fn domain_oracle(r: &FiniteAlgebra) -> bool {
    let z = r.zero().unwrap();
    !r.is_trivial() && (0..r.len()).all(|a| (0..r.len()).all(|b| r.mul(a, b) != z || a == z || b == z))
}

#[test]
fn localness_matches_oracles_and_cells() {
    for ctx in SpectralContext::ALL {
        for (name, a) in algebras(ctx) {
            let want = match ctx {
                Zariski => local_ring_oracle(&a),
                Domain => domain_oracle(&a),
                Deitmar => true,
            };
            assert_eq!(ctx.is_local(&a), want, "{ctx} {name}");
            assert_eq!(ctx.is_local_by_cells(&a), want, "{ctx} {name} via cells");
        }
    }
    assert!(Zariski.is_local(&corpus::zmod(4)));
    assert!(!Zariski.is_local(&corpus::zmod(6)));
    assert!(!Zariski.is_local(&corpus::zmod(1)));
    assert!(!Domain.is_local(&corpus::zmod(4)));
    assert!(Domain.is_local(&corpus::gf4()));
}

#[test]
fn kind_is_checked() {
    let m = arc(corpus::idempotent_pair());
    assert!(matches!(Zariski.local_forms(&m), Err(Error::KindMismatch(_))));
    let r = arc(corpus::zmod(2));
    assert!(matches!(Deitmar.local_forms(&r), Err(Error::KindMismatch(_))));
}

#[test]
fn admissibility_matches_lifting_definition() {
    for ctx in SpectralContext::ALL {
        let objs = small(ctx, 8);
        for (_, a) in &objs {
            for (_, b) in &objs {
                for f in homs(a, b) {
                    assert_eq!(ctx.is_admissible(&f), ctx.is_admissible_by_cells(&f), "{ctx} {:?}", f);
                }
            }
        }
    }
    let z4 = arc(corpus::zmod(4));
    let z2 = arc(corpus::zmod(2));
    let z6 = arc(corpus::zmod(6));
    let p = Hom::new(z4.clone(), z2.clone(), vec![0, 1, 0, 1]).unwrap();
    assert!(Zariski.is_admissible(&p));
    let q = Hom::new(z6, z2, vec![0, 1, 0, 1, 0, 1]).unwrap();
    assert!(!Domain.is_admissible(&q));
    let m = arc(corpus::nil_monoid(3));
    assert!(Deitmar.is_admissible(&Hom::identity(&m)));
}

#[test]
fn attach_cell_examples() {
    let z6 = arc(corpus::zmod(6));
    let (k, q) = Zariski.attach_cell(&z6, &CellDatum::Partition { r: 3, s: 4 }, Branch::Left).unwrap();
    assert_eq!(k.len(), 2);
    assert_eq!(q.map(), vec![0, 1, 0, 1, 0, 1]);

    let f2 = corpus::zmod(2);
    let p = arc(corpus::ring_product(&[f2.clone(), f2]));
    let a = p.index_of("(1,0)").unwrap();
    let b = p.index_of("(0,1)").unwrap();
    let (k, _) = Domain.attach_cell(&p, &CellDatum::ZeroProduct { a, b }, Branch::Left).unwrap();
    assert!(find_isomorphism(&k, &arc(corpus::zmod(2))).is_some());

    let m = arc(corpus::idempotent_pair());
    let (k, _) = Deitmar.attach_cell(&m, &CellDatum::Element { a: 1 }, Branch::Right).unwrap();
    assert_eq!(k.len(), 1);
    let (k, q) = Deitmar.attach_cell(&m, &CellDatum::Element { a: 1 }, Branch::Left).unwrap();
    assert_eq!(k.len(), 2);
    assert!(q.is_bijective());

    assert!(matches!(
        Zariski.attach_cell(&z6, &CellDatum::Partition { r: 2, s: 2 }, Branch::Left),
        Err(Error::InvalidDatum(_))
    ));
    assert!(matches!(
        Domain.attach_cell(&z6, &CellDatum::ZeroProduct { a: 2, b: 2 }, Branch::Left),
        Err(Error::InvalidDatum(_))
    ));
}

#[test]
fn attaching_a_cell_twice_changes_nothing() {
    for ctx in SpectralContext::ALL {
        for (_, a) in small(ctx, 9) {
            for d in ctx.cell_data(&a) {
                for b in [Branch::Left, Branch::Right] {
                    let (k, q) = ctx.attach_cell(&a, &d, b).unwrap();
                    assert!(q.is_surjective());
                    let (_, q2) = ctx.attach_cell(&k, &d.map(&q), b).unwrap();
                    assert!(q2.is_bijective());
                    assert!(ctx.branch_holds(&k, &d.map(&q), b));
                }
            }
        }
    }
}

fn check_factorization(ctx: SpectralContext, f: &Hom) {
    let fz = ctx.factorize(f, CellOrder::Forward).unwrap();
    let composite = fz.localization.map().then(&fz.admissible).unwrap();
    assert_eq!(composite.map(), f.map());
    assert!(ctx.is_admissible(&fz.admissible));
    for order in [CellOrder::Reverse, CellOrder::Shuffled(7), CellOrder::Shuffled(99)] {
        let other = ctx.factorize(f, order).unwrap();
        let iso = iso_under(fz.localization.map(), other.localization.map()).expect("unique up to iso");
        assert_eq!(iso.then(&other.admissible).unwrap().map(), fz.admissible.map());
    }
    // a localization that is also admissible is an isomorphism
    if fz.localization.steps().is_empty() {
        assert!(fz.localization.map().is_bijective());
    }
    assert!(!ctx.is_admissible(fz.localization.map()) || fz.localization.map().is_bijective());
}

#[test]
fn factorization_is_unique_and_admissible() {
    for ctx in SpectralContext::ALL {
        let objs = small(ctx, 9);
        for (_, a) in &objs {
            for (_, b) in &objs {
                for f in homs(a, b) {
                    check_factorization(ctx, &f);
                }
            }
        }
    }
}

#[test]
fn factorization_examples() {
    let z6 = arc(corpus::zmod(6));
    let z2 = arc(corpus::zmod(2));
    let z3 = arc(corpus::zmod(3));
    let f = Hom::new(z6.clone(), z2, vec![0, 1, 0, 1, 0, 1]).unwrap();
    let fz = Zariski.factorize(&f, CellOrder::Forward).unwrap();
    assert_eq!(fz.localization.target().len(), 2);
    assert!(fz.admissible.is_bijective());

    let g = Hom::new(z6.clone(), z3, vec![0, 1, 2, 0, 1, 2]).unwrap();
    let fz = Domain.factorize(&g, CellOrder::Forward).unwrap();
    assert_eq!(fz.localization.key(), g.kernel());
    assert!(fz.admissible.is_bijective());

    // already admissible: nothing attached
    let z4 = arc(corpus::zmod(4));
    let p = Hom::new(z4, arc(corpus::zmod(2)), vec![0, 1, 0, 1]).unwrap();
    let fz = Zariski.factorize(&p, CellOrder::Forward).unwrap();
    assert!(fz.localization.steps().is_empty());
    assert_eq!(fz.admissible.map(), p.map());
}

#[test]
fn local_form_examples() {
    let z6 = arc(corpus::zmod(6));
    let forms = Zariski.local_forms(&z6).unwrap();
    let sizes: Vec<usize> = forms.iter().map(|f| f.target().len()).collect();
    assert_eq!(sizes, vec![2, 3]);

    let z4 = arc(corpus::zmod(4));
    let forms = Zariski.local_forms(&z4).unwrap();
    assert_eq!(forms.len(), 1);
    assert!(forms[0].map().is_bijective());

    let m = arc(corpus::idempotent_pair());
    let forms = Deitmar.local_forms(&m).unwrap();
    let sizes: Vec<usize> = forms.iter().map(|f| f.target().len()).collect();
    assert_eq!(sizes, vec![1, 2]);
    let primes: Vec<Vec<usize>> = forms.iter().map(|f| Deitmar.prime_of(f).members().to_vec()).collect();
    assert_eq!(primes, vec![vec![], vec![1]]);

    assert!(Zariski.local_forms(&arc(corpus::zmod(1))).unwrap().is_empty());

    let z12 = arc(corpus::zmod(12));
    let forms = Zariski.local_forms(&z12).unwrap();
    assert!(find_isomorphism(forms[0].target(), &arc(corpus::zmod(3))).is_some());
    assert!(find_isomorphism(forms[1].target(), &arc(corpus::zmod(4))).is_some());
}

#[test]
fn local_forms_biject_with_primes() {
    for ctx in SpectralContext::ALL {
        for (name, a) in algebras(ctx) {
            let forms = ctx.local_forms(&a).unwrap();
            let mut got: Vec<_> = forms.iter().map(|f| ctx.prime_of(f)).collect();
            got.sort();
            let mut want = prime_ideals(&a);
            want.sort();
            assert_eq!(got, want, "{ctx} {name}");
            for (i, x) in forms.iter().enumerate() {
                assert!(ctx.is_local(x.target()));
                for y in &forms[i + 1..] {
                    assert!(iso_under(x.map(), y.map()).is_none(), "{ctx} {name}: duplicate form");
                }
            }
        }
    }
}

#[test]
fn saturation_agrees_with_local_forms() {
    for ctx in SpectralContext::ALL {
        for (name, a) in algebras(ctx) {
            let forms = ctx.local_forms(&a).unwrap();
            let sat = ctx.saturate_bounded(&a, a.len() + 2).unwrap();
            assert_eq!(sat.forms.len(), forms.len(), "{ctx} {name}");
            for f in &forms {
                let hits = sat.forms.iter().filter(|s| iso_under(f.map(), s.map()).is_some()).count();
                assert_eq!(hits, 1, "{ctx} {name}");
            }
        }
    }
    let z6 = arc(corpus::zmod(6));
    assert_eq!(Zariski.saturate_bounded(&z6, 3).unwrap().forms.len(), 2);
    assert!(matches!(Zariski.saturate_bounded(&z6, 1), Err(Error::DidNotStabilize(1))));
    let f4 = arc(corpus::gf4());
    let sat = Zariski.saturate_bounded(&f4, 1).unwrap();
    assert_eq!(sat.forms.len(), 1);
    assert!(sat.forms[0].steps().is_empty());
}

#[test]
fn local_forms_are_among_finite_localizations() {
    for ctx in SpectralContext::ALL {
        for (name, a) in small(ctx, 12) {
            let all = ctx.finite_localizations(&a).unwrap();
            for f in ctx.local_forms(&a).unwrap() {
                assert!(all.iter().any(|l| l.key() == f.key()), "{ctx} {name}");
            }
            for l in &all {
                assert!(l.map().is_surjective());
                assert!(l.key() == l.map().kernel());
            }
        }
    }
}

// Every map to a local target factors through exactly one local form, uniquely.
#[test]
fn multi_reflection() {
    for ctx in SpectralContext::ALL {
        let objs = small(ctx, 9);
        for (_, r) in &objs {
            let forms = ctx.local_forms(r).unwrap();
            for (_, q) in objs.iter().filter(|(_, q)| ctx.is_local(q)) {
                for f in homs(r, q) {
                    let mut hits = 0;
                    for p in &forms {
                        let count = homs(p.target(), q)
                            .into_iter()
                            .filter(|h| p.map().then(h).unwrap().map() == f.map() && ctx.is_admissible(h))
                            .count();
                        assert!(count <= 1);
                        hits += count;
                    }
                    assert_eq!(hits, 1, "{ctx} {:?}", f);
                }
            }
        }
    }
}

fn hom_pairs(ctx: SpectralContext) -> Vec<(Hom, Hom)> {
    let objs = small(ctx, 6);
    let mut out = Vec::new();
    for (_, a) in &objs {
        for (_, b) in &objs {
            for f in homs(a, b) {
                for (_, c) in &objs {
                    for g in homs(b, c) {
                        out.push((f.clone(), g));
                    }
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // g ∘ f admissible and g admissible ⇒ f admissible
    #[test]
    fn admissible_cancellation(ci in 0usize..3, pick in any::<prop::sample::Index>()) {
        let ctx = SpectralContext::ALL[ci];
        let pairs = hom_pairs(ctx);
        let (f, g) = &pairs[pick.index(pairs.len())];
        let gf = f.then(g).unwrap();
        if ctx.is_admissible(&gf) && ctx.is_admissible(g) {
            prop_assert!(ctx.is_admissible(f));
        }
    }

    #[test]
    fn localization_paths_replay(ci in 0usize..3, which in any::<prop::sample::Index>()) {
        let ctx = SpectralContext::ALL[ci];
        let objs = small(ctx, 12);
        let (_, a) = &objs[which.index(objs.len())];
        for l in ctx.finite_localizations(a).unwrap() {
            let again = conespec::context::Localization::replay(ctx, a, l.steps()).unwrap();
            prop_assert_eq!(again.map().map(), l.map().map());
        }
    }
}
