use std::path::PathBuf;
use std::sync::Arc;

use conespec::algebra::find_isomorphism;
use conespec::context::SpectralContext;
use conespec::corpus::{self, arc};
use conespec::glue::{glue, is_affine};
use conespec::io::{
    algebra_from_json, algebra_to_json, corpus_name, localization_from_json, localization_to_json, read_gluing,
    read_hom, space_from_json, space_to_dot, space_to_json,
};
use conespec::spectrum::build_spec;
use conespec::{Error, FiniteAlgebra};
use proptest::prelude::*;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn all_algebras() -> Vec<(String, FiniteAlgebra)> {
    corpus::ring_corpus().into_iter().chain(corpus::monoid_corpus()).collect()
}

/// The same algebra with its elements listed in another order.
fn permuted(a: &FiniteAlgebra, perm: &[usize]) -> FiniteAlgebra {
    let n = a.len();
    let mut inv = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let table = |t: Vec<Vec<usize>>| -> Vec<Vec<usize>> {
        (0..n).map(|i| (0..n).map(|j| inv[t[perm[i]][perm[j]]]).collect()).collect()
    };
    let labels = perm.iter().map(|&o| a.label(o).to_string()).collect();
    match a.add_table() {
        Some(add) => {
            FiniteAlgebra::ring(labels, table(add), table(a.mul_table()), inv[a.zero().unwrap()], inv[a.one()]).unwrap()
        }
        None => FiniteAlgebra::monoid(labels, table(a.mul_table()), inv[a.one()]).unwrap(),
    }
}

#[test]
fn corpus_round_trips_exactly() {
    for (name, a) in all_algebras() {
        let text = algebra_to_json(&a);
        let b = algebra_from_json(&text).unwrap();
        assert!(a == b, "{name}");
        assert_eq!(algebra_to_json(&b), text, "{name}");
        assert_eq!(corpus_name(&arc(b)).as_deref(), Some(name.as_str()));
    }
}

proptest! {
    #[test]
    fn relabelled_algebras_round_trip(idx in 0usize..39, seed in any::<u64>()) {
        let list = all_algebras();
        let (_, a) = &list[idx % list.len()];
        let mut perm: Vec<usize> = (0..a.len()).collect();
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let b = permuted(a, &perm);
        let text = algebra_to_json(&b);
        let c = algebra_from_json(&text).unwrap();
        prop_assert!(b == c);
        prop_assert_eq!(algebra_to_json(&c), text);
        prop_assert!(find_isomorphism(&arc(a.clone()), &arc(c)).is_some());
    }
}

#[test]
fn malformed_algebras_are_rejected() {
    let no_add = r#"{"kind":"ring","elements":["0","1"],"mul":[[0,0],[0,1]],"zero":0,"one":1}"#;
    assert!(matches!(algebra_from_json(no_add), Err(Error::Input(_))));
    let not_assoc = r#"{"kind":"monoid","elements":["1","a","b"],"mul":[[0,1,2],[1,2,0],[2,0,0]],"unit":0}"#;
    assert!(matches!(algebra_from_json(not_assoc), Err(Error::NonAssociative { .. })));
    let extra = r#"{"kind":"monoid","elements":["1"],"mul":[[0]],"unit":0,"colour":"red"}"#;
    assert!(matches!(algebra_from_json(extra), Err(Error::Input(_))));
    let ragged = r#"{"kind":"monoid","elements":["1","a"],"mul":[[0,1],[1]],"unit":0}"#;
    assert!(matches!(algebra_from_json(ragged), Err(Error::BadTable(_))));
    let unit_monoid = r#"{"kind":"monoid","elements":["1","e"],"mul":[[0,1],[1,1]],"one":0}"#;
    assert_eq!(algebra_from_json(unit_monoid).unwrap(), corpus::idempotent_pair());
}

#[test]
fn cell_paths_round_trip() {
    for ctx in SpectralContext::ALL {
        let list = if ctx == SpectralContext::Deitmar { corpus::monoid_corpus() } else { corpus::ring_corpus() };
        for (name, r) in list.into_iter().filter(|(_, r)| r.len() <= 9) {
            let r = arc(r);
            for k in ctx.finite_localizations(&r).unwrap() {
                let text = localization_to_json(&k).to_string();
                let back = localization_from_json(ctx, &r, &text).unwrap();
                assert_eq!(back.key(), k.key(), "{ctx} {name} {text}");
                assert_eq!(back.steps(), k.steps());
            }
        }
    }
    let z6 = arc(corpus::zmod(6));
    let bad = r#"[{"cell":{"r":"2","s":"3","branch":"left"}}]"#;
    assert!(matches!(localization_from_json(SpectralContext::Zariski, &z6, bad), Err(Error::InvalidDatum(_))));
    let wrong = r#"[{"cell":{"a":"2","branch":"left"}}]"#;
    assert!(matches!(localization_from_json(SpectralContext::Zariski, &z6, wrong), Err(Error::Input(_))));
}

#[test]
fn example_files_load() {
    let f = read_hom(&data("f.json")).unwrap();
    assert_eq!(f.source().len(), 6);
    assert_eq!(f.target().len(), 2);

    let p1 = glue(&read_gluing(&data("p1-f1.json")).unwrap()).unwrap();
    assert_eq!(p1.space.points(), 3);
    assert!(!is_affine(&p1.space).unwrap().is_affine);

    let d = glue(&read_gluing(&data("doubled-z6.json")).unwrap()).unwrap();
    assert_eq!(d.space.points(), 3);
    assert!(is_affine(&d.space).unwrap().is_affine);
}

#[test]
fn spaces_round_trip() {
    let p1 = glue(&read_gluing(&data("p1-f1.json")).unwrap()).unwrap().space;
    let mut spaces = vec![p1];
    for (ctx, a) in [
        (SpectralContext::Zariski, corpus::zmod(12)),
        (SpectralContext::Domain, corpus::truncated_poly(2, 2)),
        (SpectralContext::Deitmar, corpus::square_zero_monoid()),
        (SpectralContext::Zariski, corpus::zmod(1)),
    ] {
        spaces.push(Arc::new(build_spec(ctx, &arc(a)).unwrap()));
    }
    for x in spaces {
        let text = space_to_json(&x);
        let y = space_from_json(&text).unwrap();
        assert_eq!(y.topology().opens(), x.topology().opens());
        assert_eq!(y.labels(), x.labels());
        assert_eq!(space_to_json(&y), text);
    }
}

#[test]
fn sierpinski_dot() {
    let s = build_spec(SpectralContext::Deitmar, &arc(corpus::idempotent_pair())).unwrap();
    let dot = space_to_dot(&s);
    assert_eq!(dot.matches("->").count(), 1);
    let z6 = build_spec(SpectralContext::Zariski, &arc(corpus::zmod(6))).unwrap();
    assert_eq!(space_to_dot(&z6).matches("->").count(), 0);
}
