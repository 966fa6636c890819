use std::sync::Arc;

use super::{AlgebraKind, FiniteAlgebra, Hom, Ideal};
use crate::error::{Error, Result};

/// An equivalence relation compatible with all operations, as a class index per element.
/// Classes are numbered in order of their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Congruence {
    class: Vec<u32>,
    count: usize,
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] as usize != x {
            let p = self.0[x] as usize;
            self.0[x] = self.0[p];
            x = p;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo as u32;
        true
    }
}

impl Congruence {
    /// Canonicalizes an arbitrary class labelling (e.g. the image of a map).
    pub fn from_classes(labels: Vec<usize>) -> Self {
        let mut ids = std::collections::HashMap::new();
        let class: Vec<u32> = labels
            .iter()
            .map(|l| {
                let next = ids.len() as u32;
                *ids.entry(*l).or_insert(next)
            })
            .collect();
        Congruence { class, count: ids.len() }
    }

    pub fn identity(n: usize) -> Self {
        Congruence { class: (0..n as u32).collect(), count: n }
    }

    /// Smallest congruence containing `pairs`.
    pub fn generated(alg: &FiniteAlgebra, pairs: &[(usize, usize)]) -> Self {
        let n = alg.len();
        let mut uf = UnionFind((0..n as u32).collect());
        let mut queue: Vec<(usize, usize)> = pairs.to_vec();
        while let Some((a, b)) = queue.pop() {
            if !uf.union(a, b) {
                continue;
            }
            for m in 0..n {
                queue.push((alg.mul(a, m), alg.mul(b, m)));
                if alg.is_ring() {
                    queue.push((alg.add(a, m), alg.add(b, m)));
                }
            }
        }
        let roots: Vec<usize> = (0..n).map(|x| uf.find(x)).collect();
        Self::from_classes(roots)
    }

    /// Smallest congruence containing both.
    pub fn join(&self, other: &Congruence, alg: &FiniteAlgebra) -> Self {
        let mut pairs = self.spanning_pairs();
        pairs.extend(other.spanning_pairs());
        Self::generated(alg, &pairs)
    }

    /// Pairs `(x, first element of x's class)`, which generate the relation.
    pub fn spanning_pairs(&self) -> Vec<(usize, usize)> {
        let mut first = vec![usize::MAX; self.count];
        let mut out = Vec::new();
        for (x, &c) in self.class.iter().enumerate() {
            let c = c as usize;
            if first[c] == usize::MAX {
                first[c] = x;
            } else {
                out.push((x, first[c]));
            }
        }
        out
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class[x] as usize
    }

    pub fn classes(&self) -> &[u32] {
        &self.class
    }

    pub fn num_classes(&self) -> usize {
        self.count
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.class[a] == self.class[b]
    }

    /// `self ⊆ other` as relations.
    pub fn refines(&self, other: &Congruence) -> bool {
        self.spanning_pairs().into_iter().all(|(a, b)| other.related(a, b))
    }

    pub fn is_identity(&self) -> bool {
        self.count == self.class.len()
    }
}

/// What to divide by.
#[derive(Clone, Debug)]
pub enum QuotientBy {
    Ideal(Ideal),
    Congruence(Congruence),
    Pairs(Vec<(usize, usize)>),
}

/// Quotient by a congruence that is already known to be one.
pub(crate) fn quotient_by(alg: &Arc<FiniteAlgebra>, cong: &Congruence) -> (Arc<FiniteAlgebra>, Hom) {
    if cong.is_identity() {
        return (alg.clone(), Hom::identity(alg));
    }
    let k = cong.num_classes();
    let mut rep = vec![usize::MAX; k];
    for x in 0..alg.len() {
        let c = cong.class_of(x);
        if rep[c] == usize::MAX {
            rep[c] = x;
        }
    }
    let labels = rep.iter().map(|&r| alg.label(r).to_string()).collect();
    let cls = |x: usize| cong.class_of(x);
    let mul = |a: usize, b: usize| cls(alg.mul(rep[a], rep[b]));
    let add = |a: usize, b: usize| cls(alg.add(rep[a], rep[b]));
    let q = FiniteAlgebra::tabulate(
        alg.kind(),
        labels,
        alg.is_ring().then_some(&add as &dyn Fn(usize, usize) -> usize),
        &mul,
        alg.zero().map(cls),
        cls(alg.one()),
    );
    let q = Arc::new(q);
    let map = (0..alg.len()).map(|x| cls(x) as u32).collect();
    let h = Hom::new_unchecked(alg.clone(), q.clone(), map);
    (q, h)
}

/// Quotient algebra with its projection.
pub fn quotient(alg: &Arc<FiniteAlgebra>, by: &QuotientBy) -> Result<(Arc<FiniteAlgebra>, Hom)> {
    let cong = match by {
        QuotientBy::Ideal(ideal) => {
            ideal.validate(alg)?;
            let members = ideal.members();
            let pairs: Vec<(usize, usize)> = match alg.kind() {
                AlgebraKind::Ring => {
                    let z = alg.zero().unwrap();
                    members.iter().map(|&i| (i, z)).collect()
                }
                AlgebraKind::Monoid => members.windows(2).map(|w| (w[0], w[1])).collect(),
            };
            Congruence::generated(alg, &pairs)
        }
        QuotientBy::Congruence(c) => {
            if c.classes().len() != alg.len() {
                return Err(Error::InvalidDatum("congruence has the wrong length".into()));
            }
            let closed = Congruence::generated(alg, &c.spanning_pairs());
            if closed != *c {
                return Err(Error::InvalidDatum("relation is not a congruence".into()));
            }
            closed
        }
        QuotientBy::Pairs(pairs) => {
            if pairs.iter().any(|&(a, b)| a >= alg.len() || b >= alg.len()) {
                return Err(Error::InvalidDatum("pair out of range".into()));
            }
            Congruence::generated(alg, pairs)
        }
    };
    Ok(quotient_by(alg, &cong))
}

/// Kernel of the localization `R → R[a⁻¹]`: `x ~ y` iff `aᵏx = aᵏy` for some `k`.
/// The relation grows with `k` and is stable once `k = |R|`.
pub(crate) fn inversion_congruence(alg: &FiniteAlgebra, a: usize) -> Congruence {
    let p = alg.pow(a, alg.len());
    Congruence::from_classes((0..alg.len()).map(|x| alg.mul(p, x)).collect())
}

/// `R[a⁻¹]` with its canonical map. For finite algebras this is always a quotient of `R`.
pub fn invert_element(alg: &Arc<FiniteAlgebra>, a: usize) -> Result<(Arc<FiniteAlgebra>, Hom)> {
    if a >= alg.len() {
        return Err(Error::InvalidDatum(format!("element {a} out of range")));
    }
    let cong = inversion_congruence(alg, a);
    let (q, h) = quotient_by(alg, &cong);
    debug_assert!(q.is_unit(h.apply(a)));
    Ok((q, h))
}
