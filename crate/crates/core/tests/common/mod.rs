#![allow(dead_code)]

use std::sync::Arc;

use conespec::algebra::{product, DEFAULT_SIZE_BOUND};
use conespec::context::SpectralContext;
use conespec::corpus::{self, arc};
use conespec::spectrum::{build_spec, Presheaf, Sheaf};
use conespec::{FiniteAlgebra, Hom, Result};
use rand::{Rng, SeedableRng};

pub fn algebras(ctx: SpectralContext) -> Vec<(String, Arc<FiniteAlgebra>)> {
    let list = match ctx {
        SpectralContext::Deitmar => corpus::monoid_corpus(),
        _ => corpus::ring_corpus(),
    };
    list.into_iter().map(|(n, a)| (n, arc(a))).collect()
}

pub fn small(ctx: SpectralContext, max: usize) -> Vec<(String, Arc<FiniteAlgebra>)> {
    algebras(ctx).into_iter().filter(|(_, a)| a.len() <= max).collect()
}

// Presheaves built from a sheaf: extra sections on an up-closed family of opens, or
// collapsed sections on a down-closed one.
pub fn perturbed(base: &Sheaf, seed: u64) -> Result<Presheaf> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let p = base.presheaf();
    let t = p.topology().clone();
    let opens = t.opens().to_vec();
    let pivot = opens[rng.gen_range(0..opens.len())];
    let extra = if p.kind() == conespec::AlgebraKind::Ring { corpus::zmod(2) } else { corpus::idempotent_pair() };
    let extra = arc(extra);
    if rng.gen_bool(0.5) {
        // F(W) × A for W ⊇ pivot
        let up = |w: u64| pivot & !w == 0;
        let mut sections = Vec::new();
        let mut proj = Vec::new();
        for &w in &opens {
            if up(w) {
                let (prod, pr) = product(p.kind(), &[p.section(w).clone(), extra.clone()], DEFAULT_SIZE_BOUND)?;
                sections.push(prod);
                proj.push(Some(pr));
            } else {
                sections.push(p.section(w).clone());
                proj.push(None);
            }
        }
        let secs = sections.clone();
        Presheaf::new(t.clone(), p.kind(), sections, |i, j| {
            let base_r = p.restriction_at(i, j);
            match (&proj[i], &proj[j]) {
                (None, None) => Ok(base_r.clone()),
                (Some(pi), None) => pi[0].then(base_r),
                (Some(pi), Some(pj)) => {
                    let target = &secs[j];
                    let map = (0..secs[i].len())
                        .map(|s| {
                            let a = base_r.apply(pi[0].apply(s));
                            let b = pi[1].apply(s);
                            (0..target.len()).find(|&u| pj[0].apply(u) == a && pj[1].apply(u) == b).unwrap()
                        })
                        .collect();
                    Hom::new(secs[i].clone(), target.clone(), map)
                }
                (None, Some(_)) => unreachable!(),
            }
        })
    } else {
        // the terminal algebra on W ⊆ pivot
        let down = |w: u64| w & !pivot == 0;
        let one = arc(FiniteAlgebra::terminal(p.kind()));
        let sections: Vec<Arc<FiniteAlgebra>> =
            opens.iter().map(|&w| if down(w) { one.clone() } else { p.section(w).clone() }).collect();
        let secs = sections.clone();
        Presheaf::new(t.clone(), p.kind(), sections, |i, j| {
            if down(opens[j]) {
                Hom::new(secs[i].clone(), one.clone(), vec![0; secs[i].len()])
            } else {
                Ok(p.restriction_at(i, j).clone())
            }
        })
    }
}

pub fn corpus_sheaves() -> Vec<Sheaf> {
    let mut out = Vec::new();
    for ctx in SpectralContext::ALL {
        for (_, r) in small(ctx, 12) {
            let s = build_spec(ctx, &r).unwrap();
            if s.points() >= 2 {
                out.push(s.sheaf().clone());
            }
        }
    }
    out
}
