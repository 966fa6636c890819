use std::sync::Arc;

use super::congruence::quotient_by;
use super::hom::same;
use super::tensor::tensor_z;
use super::{product, AlgebraKind, Congruence, FiniteAlgebra, Hom};
use crate::error::{Error, Result};

/// `K +_R L` with its two coprojections.
#[derive(Clone, Debug)]
pub struct Pushout {
    pub apex: Arc<FiniteAlgebra>,
    pub left: Hom,
    pub right: Hom,
}

/// Pushout of `f: R → K` and `g: R → L`.
///
/// If either leg is surjective the pushout is a quotient of the other side, which is
/// always the case for localizations of finite algebras.
pub fn pushout(f: &Hom, g: &Hom, bound: usize) -> Result<Pushout> {
    if !same(f.source(), g.source()) {
        return Err(Error::KindMismatch("pushout legs have different sources".into()));
    }
    f.source().check_kind(f.target())?;
    f.source().check_kind(g.target())?;
    if f.is_surjective() {
        return Ok(along_surjection(f, g));
    }
    if g.is_surjective() {
        let p = along_surjection(g, f);
        return Ok(Pushout { apex: p.apex, left: p.right, right: p.left });
    }
    let (k, l) = (f.target(), g.target());
    let (apex, into_k, into_l) = match f.source().kind() {
        AlgebraKind::Monoid => {
            let (p, _) = product(AlgebraKind::Monoid, &[k.clone(), l.clone()], bound)?;
            let enc = |a: usize, b: usize| a * l.len() + b;
            let ik = (0..k.len()).map(|a| enc(a, l.one()) as u32).collect();
            let il = (0..l.len()).map(|b| enc(k.one(), b) as u32).collect();
            (p.clone(), Hom::new_unchecked(k.clone(), p.clone(), ik), Hom::new_unchecked(l.clone(), p, il))
        }
        AlgebraKind::Ring => tensor_z(k, l, bound)?,
    };
    let pairs: Vec<(usize, usize)> =
        (0..f.source().len()).map(|r| (into_k.apply(f.apply(r)), into_l.apply(g.apply(r)))).collect();
    let cong = Congruence::generated(&apex, &pairs);
    let (q, proj) = quotient_by(&apex, &cong);
    Ok(Pushout { left: into_k.then(&proj)?, right: into_l.then(&proj)?, apex: q })
}

fn along_surjection(f: &Hom, g: &Hom) -> Pushout {
    let k = f.target();
    let mut rep = vec![usize::MAX; k.len()];
    let mut pairs = Vec::new();
    for r in 0..f.source().len() {
        let x = f.apply(r);
        if rep[x] == usize::MAX {
            rep[x] = r;
        } else {
            pairs.push((g.apply(r), g.apply(rep[x])));
        }
    }
    let cong = Congruence::generated(g.target(), &pairs);
    let (q, proj) = quotient_by(g.target(), &cong);
    let left = Hom::new_unchecked(k.clone(), q.clone(), rep.iter().map(|&r| proj.apply(g.apply(r)) as u32).collect());
    Pushout { apex: q, left, right: proj }
}

/// The map out of a pushout determined by compatible `d1: K → X` and `d2: L → X`.
pub fn induced_from_pushout(po: &Pushout, d1: &Hom, d2: &Hom) -> Option<Hom> {
    if !same(d1.target(), d2.target()) {
        return None;
    }
    let mut fixed = vec![None; po.apex.len()];
    for (leg, d) in [(&po.left, d1), (&po.right, d2)] {
        for x in 0..leg.source().len() {
            let (p, v) = (leg.apply(x), d.apply(x));
            match fixed[p] {
                None => fixed[p] = Some(v),
                Some(w) if w != v => return None,
                _ => {}
            }
        }
    }
    let mut found = None;
    super::homs_with(&po.apex, d1.target(), &fixed, false, &mut |h| {
        found = Some(h);
        false
    });
    found
}
