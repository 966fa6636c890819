use std::collections::{BTreeSet, VecDeque};

use super::FiniteAlgebra;
use crate::error::{Error, Result};

/// A set of elements closed under multiplication by anything (and under addition for rings).
/// Monoid ideals may be empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ideal(Vec<usize>);

impl Ideal {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Ideal(members)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_proper(&self, alg: &FiniteAlgebra) -> bool {
        self.0.len() < alg.len()
    }

    pub fn validate(&self, alg: &FiniteAlgebra) -> Result<()> {
        if self.0.iter().any(|&x| x >= alg.len()) {
            return Err(Error::InvalidIdeal("element out of range".into()));
        }
        if let Some(z) = alg.zero() {
            if !self.contains(z) {
                return Err(Error::InvalidIdeal("ring ideal must contain zero".into()));
            }
            for &a in &self.0 {
                for &b in &self.0 {
                    if !self.contains(alg.add(a, b)) {
                        return Err(Error::InvalidIdeal(format!(
                            "not closed under addition at ({}, {})",
                            alg.label(a),
                            alg.label(b)
                        )));
                    }
                }
            }
        }
        for &a in &self.0 {
            for r in 0..alg.len() {
                if !self.contains(alg.mul(r, a)) {
                    return Err(Error::InvalidIdeal(format!("not absorbing at ({}, {})", alg.label(r), alg.label(a))));
                }
            }
        }
        Ok(())
    }

    /// Smallest ideal containing `gens`.
    pub fn generated(alg: &FiniteAlgebra, gens: &[usize]) -> Ideal {
        let n = alg.len();
        let mut inside = vec![false; n];
        let mut members = Vec::new();
        let mut queue: VecDeque<usize> = gens.iter().copied().collect();
        if let Some(z) = alg.zero() {
            queue.push_back(z);
        }
        while let Some(x) = queue.pop_front() {
            if inside[x] {
                continue;
            }
            inside[x] = true;
            members.push(x);
            for r in 0..n {
                queue.push_back(alg.mul(r, x));
            }
            if alg.is_ring() {
                for &y in &members {
                    queue.push_back(alg.add(x, y));
                }
            }
        }
        Ideal::new(members)
    }
}

/// Every ideal, in order of size then members.
pub fn ideals(alg: &FiniteAlgebra) -> Vec<Ideal> {
    let start = Ideal::generated(alg, &[]);
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([start.clone()]);
    seen.insert(start);
    while let Some(i) = queue.pop_front() {
        for a in 0..alg.len() {
            if i.contains(a) {
                continue;
            }
            let mut gens = i.members().to_vec();
            gens.push(a);
            let j = Ideal::generated(alg, &gens);
            if seen.insert(j.clone()) {
                queue.push_back(j);
            }
        }
    }
    let mut out: Vec<Ideal> = seen.into_iter().collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

pub fn is_prime_ideal(alg: &FiniteAlgebra, ideal: &Ideal) -> bool {
    if !ideal.is_proper(alg) || ideal.validate(alg).is_err() {
        return false;
    }
    for a in 0..alg.len() {
        if ideal.contains(a) {
            continue;
        }
        for b in 0..alg.len() {
            if !ideal.contains(b) && ideal.contains(alg.mul(a, b)) {
                return false;
            }
        }
    }
    true
}

/// Prime ideals. For monoids this includes the empty ideal.
pub fn prime_ideals(alg: &FiniteAlgebra) -> Vec<Ideal> {
    ideals(alg).into_iter().filter(|i| is_prime_ideal(alg, i)).collect()
}

pub fn monoid_primes(alg: &FiniteAlgebra) -> Vec<Ideal> {
    prime_ideals(alg)
}

/// The nilpotent elements of a ring.
pub fn nilradical(alg: &FiniteAlgebra) -> Result<Ideal> {
    if !alg.is_ring() {
        return Err(Error::KindMismatch("nilradical needs a ring".into()));
    }
    Ok(Ideal::new((0..alg.len()).filter(|&a| alg.is_nilpotent(a)).collect()))
}
