//! Finite commutative rings and monoids given by operation tables.

mod congruence;
mod construct;
mod hom;
mod ideal;
mod pushout;
mod tensor;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use congruence::{invert_element, quotient, Congruence, QuotientBy};
pub use construct::{equalizer, limit, product, pullback, Diagram, Limit};
pub(crate) use hom::same;
pub use hom::{find_isomorphism, hom_under, homs, homs_with, iso_under, Hom};
pub use ideal::{ideals, is_prime_ideal, monoid_primes, nilradical, prime_ideals, Ideal};
pub use pushout::{induced_from_pushout, pushout, Pushout};

/// Default hard cap on the number of elements of any constructed algebra.
pub const DEFAULT_SIZE_BOUND: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraKind {
    Ring,
    Monoid,
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraKind::Ring => f.write_str("ring"),
            AlgebraKind::Monoid => f.write_str("monoid"),
        }
    }
}

/// A finite commutative ring or commutative monoid, elements indexed `0..len`.
#[derive(Clone)]
pub struct FiniteAlgebra {
    kind: AlgebraKind,
    labels: Vec<String>,
    mul: Vec<u32>,
    add: Option<Vec<u32>>,
    zero: Option<u32>,
    one: u32,
    neg: Vec<u32>,
    inv: Vec<Option<u32>>,
}

impl PartialEq for FiniteAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.one == other.one
            && self.zero == other.zero
            && self.mul == other.mul
            && self.add == other.add
            && self.labels == other.labels
    }
}

impl Eq for FiniteAlgebra {}

impl fmt::Debug for FiniteAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{{}}}", self.kind, self.labels.join(","))
    }
}

fn check_table(name: &str, table: &[Vec<usize>], n: usize) -> Result<Vec<u32>> {
    if table.len() != n {
        return Err(Error::BadTable(format!("{name} table has {} rows, expected {n}", table.len())));
    }
    let mut flat = Vec::with_capacity(n * n);
    for (i, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(Error::BadTable(format!("{name} row {i} has {} entries, expected {n}", row.len())));
        }
        for &x in row {
            if x >= n {
                return Err(Error::BadTable(format!("{name} entry {x} out of range in row {i}")));
            }
            flat.push(x as u32);
        }
    }
    Ok(flat)
}

impl FiniteAlgebra {
    /// Builds and validates a commutative ring from its tables.
    pub fn ring(
        labels: Vec<String>,
        add: Vec<Vec<usize>>,
        mul: Vec<Vec<usize>>,
        zero: usize,
        one: usize,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::BadTable("an algebra needs at least one element".into()));
        }
        if zero >= n || one >= n {
            return Err(Error::BadTable("distinguished element out of range".into()));
        }
        let add = check_table("add", &add, n)?;
        let mul = check_table("mul", &mul, n)?;
        check_labels(&labels)?;
        let a = Self::from_flat(AlgebraKind::Ring, labels, Some(add), mul, Some(zero), one);
        a.validate()?;
        Ok(a)
    }

    /// Builds and validates a commutative monoid from its table.
    pub fn monoid(labels: Vec<String>, mul: Vec<Vec<usize>>, unit: usize) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::BadTable("an algebra needs at least one element".into()));
        }
        if unit >= n {
            return Err(Error::BadTable("unit out of range".into()));
        }
        let mul = check_table("mul", &mul, n)?;
        check_labels(&labels)?;
        let a = Self::from_flat(AlgebraKind::Monoid, labels, None, mul, None, unit);
        a.validate()?;
        Ok(a)
    }

    /// Builds from flat tables without validation. Callers guarantee the axioms.
    pub(crate) fn from_flat(
        kind: AlgebraKind,
        labels: Vec<String>,
        add: Option<Vec<u32>>,
        mul: Vec<u32>,
        zero: Option<usize>,
        one: usize,
    ) -> Self {
        let n = labels.len();
        let mut neg = Vec::new();
        if let (Some(add), Some(z)) = (&add, zero) {
            neg = vec![0; n];
            for a in 0..n {
                for b in 0..n {
                    if add[a * n + b] as usize == z {
                        neg[a] = b as u32;
                        break;
                    }
                }
            }
        }
        let mut inv = vec![None; n];
        for a in 0..n {
            for b in 0..n {
                if mul[a * n + b] as usize == one {
                    inv[a] = Some(b as u32);
                    break;
                }
            }
        }
        FiniteAlgebra { kind, labels, mul, add, zero: zero.map(|z| z as u32), one: one as u32, neg, inv }
    }

    /// Builds an algebra from operation closures over `0..n`. Used for constructed algebras.
    pub(crate) fn tabulate(
        kind: AlgebraKind,
        labels: Vec<String>,
        add: Option<&dyn Fn(usize, usize) -> usize>,
        mul: &dyn Fn(usize, usize) -> usize,
        zero: Option<usize>,
        one: usize,
    ) -> Self {
        let n = labels.len();
        let mut m = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                m.push(mul(a, b) as u32);
            }
        }
        let ad = add.map(|f| {
            let mut t = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    t.push(f(a, b) as u32);
                }
            }
            t
        });
        Self::from_flat(kind, labels, ad, m, zero, one)
    }

    /// The one-element algebra of the given kind (terminal object).
    pub fn terminal(kind: AlgebraKind) -> Self {
        let add = match kind {
            AlgebraKind::Ring => Some(vec![0]),
            AlgebraKind::Monoid => None,
        };
        let zero = add.as_ref().map(|_| 0);
        Self::from_flat(kind, vec!["0".into()], add, vec![0], zero, 0)
    }

    /// Checks commutativity, associativity, unit laws, negatives and distributivity.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let l = |i: usize| self.labels[i].clone();
        let mut ops: Vec<(&'static str, &[u32], usize)> = vec![("mul", &self.mul, self.one as usize)];
        if let (Some(add), Some(z)) = (&self.add, self.zero) {
            ops.push(("add", add, z as usize));
        }
        for &(op, t, unit) in &ops {
            for a in 0..n {
                for b in 0..n {
                    if t[a * n + b] != t[b * n + a] {
                        return Err(Error::NonCommutative { op, a: l(a), b: l(b) });
                    }
                }
            }
            for a in 0..n {
                if t[unit * n + a] as usize != a {
                    let role = if op == "mul" { "one" } else { "zero" };
                    return Err(Error::BadUnit { role, witness: l(a) });
                }
            }
            for a in 0..n {
                for b in 0..n {
                    let ab = t[a * n + b] as usize;
                    for c in 0..n {
                        let bc = t[b * n + c] as usize;
                        if t[ab * n + c] != t[a * n + bc] {
                            return Err(Error::NonAssociative { op, a: l(a), b: l(b), c: l(c) });
                        }
                    }
                }
            }
        }
        if let (Some(add), Some(z)) = (&self.add, self.zero) {
            for a in 0..n {
                if add[a * n + self.neg[a] as usize] != z {
                    return Err(Error::NoNegative(l(a)));
                }
            }
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let lhs = self.mul[a * n + add[b * n + c] as usize];
                        let rhs = add[self.mul[a * n + b] as usize * n + self.mul[a * n + c] as usize];
                        if lhs != rhs {
                            return Err(Error::NoDistributivity { a: l(a), b: l(b), c: l(c) });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn is_ring(&self) -> bool {
        self.kind == AlgebraKind::Ring
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True for the one-element algebra.
    pub fn is_trivial(&self) -> bool {
        self.len() == 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn one(&self) -> usize {
        self.one as usize
    }

    /// Additive identity; `None` for monoids.
    pub fn zero(&self) -> Option<usize> {
        self.zero.map(|z| z as usize)
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.len() + b] as usize
    }

    /// Addition. Panics on monoids.
    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add.as_ref().expect("monoid has no addition")[a * self.len() + b] as usize
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.neg[a] as usize
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn inverse(&self, a: usize) -> Option<usize> {
        self.inv[a].map(|x| x as usize)
    }

    pub fn is_unit(&self, a: usize) -> bool {
        self.inv[a].is_some()
    }

    pub fn units(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.is_unit(a)).collect()
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.mul(a, a) == a).collect()
    }

    pub fn pow(&self, a: usize, k: usize) -> usize {
        let mut r = self.one();
        for _ in 0..k {
            r = self.mul(r, a);
        }
        r
    }

    pub fn is_nilpotent(&self, a: usize) -> bool {
        match self.zero() {
            Some(z) => self.pow(a, self.len()) == z,
            None => false,
        }
    }

    pub fn mul_table(&self) -> Vec<Vec<usize>> {
        rows(&self.mul, self.len())
    }

    pub fn add_table(&self) -> Option<Vec<Vec<usize>>> {
        self.add.as_ref().map(|t| rows(t, self.len()))
    }

    /// Cheap isomorphism invariants: size, idempotents, units, and squares.
    pub fn invariants(&self) -> (AlgebraKind, usize, usize, usize, usize) {
        let squares = (0..self.len()).map(|a| self.mul(a, a)).collect::<std::collections::BTreeSet<_>>().len();
        (self.kind, self.len(), self.idempotents().len(), self.units().len(), squares)
    }

    pub fn check_kind(&self, other: &FiniteAlgebra) -> Result<()> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch(format!("{} vs {}", self.kind, other.kind)));
        }
        Ok(())
    }

    pub fn into_arc(self) -> Arc<Self> {
        Arc::new(self)
    }
}

fn rows(t: &[u32], n: usize) -> Vec<Vec<usize>> {
    t.chunks(n.max(1)).map(|r| r.iter().map(|&x| x as usize).collect()).collect()
}

fn check_labels(labels: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::BadTable(format!("duplicate element label {l:?}")));
        }
    }
    Ok(())
}

pub(crate) fn check_size(n: usize, bound: usize) -> Result<()> {
    if n > bound {
        return Err(Error::SizeBound { limit: bound, attempted: n });
    }
    Ok(())
}
