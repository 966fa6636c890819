//! Cone systems: which algebras count as local, which maps as admissible, and the cells
//! whose attachment builds localizations.
//!
//! * `zariski` — rings; a cell is `r + s = 1` with a branch inverting `r` or `s`.
//! * `domain` — rings; a cell is `ab = 0` with a branch killing `a` or `b`.
//! * `deitmar` — monoids; a cell is an element `a` with a trivial branch and one inverting `a`.
//!
//! Both ring contexts also carry the empty cone on the zero ring, so the zero ring is never local.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    hom_under, invert_element, iso_under, monoid_primes, prime_ideals, quotient, AlgebraKind, Congruence,
    FiniteAlgebra, Hom, Ideal, QuotientBy,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralContext {
    Zariski,
    Domain,
    Deitmar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Left,
    Right,
}

/// An attaching map from a cone summit, recorded by the images of its generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellDatum {
    /// `r + s = 1`.
    Partition { r: usize, s: usize },
    /// `a · b = 0`.
    ZeroProduct { a: usize, b: usize },
    /// Any element of a monoid.
    Element { a: usize },
}

impl CellDatum {
    /// Image under a map.
    pub fn map(&self, h: &Hom) -> CellDatum {
        match *self {
            CellDatum::Partition { r, s } => CellDatum::Partition { r: h.apply(r), s: h.apply(s) },
            CellDatum::ZeroProduct { a, b } => CellDatum::ZeroProduct { a: h.apply(a), b: h.apply(b) },
            CellDatum::Element { a } => CellDatum::Element { a: h.apply(a) },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellStep {
    pub datum: CellDatum,
    pub branch: Branch,
}

/// Order in which cells are tried during factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellOrder {
    Forward,
    Reverse,
    Shuffled(u64),
}

impl fmt::Display for SpectralContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SpectralContext {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zariski" => Ok(SpectralContext::Zariski),
            "domain" => Ok(SpectralContext::Domain),
            "deitmar" => Ok(SpectralContext::Deitmar),
            other => Err(Error::Input(format!("unknown context {other:?}"))),
        }
    }
}

impl SpectralContext {
    pub const ALL: [SpectralContext; 3] = [SpectralContext::Zariski, SpectralContext::Domain, SpectralContext::Deitmar];

    pub fn name(&self) -> &'static str {
        match self {
            SpectralContext::Zariski => "zariski",
            SpectralContext::Domain => "domain",
            SpectralContext::Deitmar => "deitmar",
        }
    }

    pub fn kind(&self) -> AlgebraKind {
        match self {
            SpectralContext::Deitmar => AlgebraKind::Monoid,
            _ => AlgebraKind::Ring,
        }
    }

    pub fn check_algebra(&self, a: &FiniteAlgebra) -> Result<()> {
        if a.kind() != self.kind() {
            return Err(Error::KindMismatch(format!("{} context needs a {}, got a {}", self, self.kind(), a.kind())));
        }
        Ok(())
    }

    /// True when the empty cone removes `a`: the zero ring in the ring contexts.
    pub fn deletes(&self, a: &FiniteAlgebra) -> bool {
        self.kind() == AlgebraKind::Ring && a.is_trivial()
    }

    /// Every attaching datum at `a`, in a fixed order.
    pub fn cell_data(&self, a: &FiniteAlgebra) -> Vec<CellDatum> {
        let n = a.len();
        match self {
            SpectralContext::Zariski => {
                let one = a.one();
                (0..n).map(|r| CellDatum::Partition { r, s: a.sub(one, r) }).collect()
            }
            SpectralContext::Domain => {
                let z = a.zero().unwrap();
                let mut out = Vec::new();
                for x in 0..n {
                    for y in 0..n {
                        if a.mul(x, y) == z {
                            out.push(CellDatum::ZeroProduct { a: x, b: y });
                        }
                    }
                }
                out
            }
            SpectralContext::Deitmar => (0..n).map(|a| CellDatum::Element { a }).collect(),
        }
    }

    pub fn validate_datum(&self, alg: &FiniteAlgebra, d: &CellDatum) -> Result<()> {
        self.check_algebra(alg)?;
        let n = alg.len();
        let in_range = |xs: &[usize]| xs.iter().all(|&x| x < n);
        match (self, *d) {
            (SpectralContext::Zariski, CellDatum::Partition { r, s }) if in_range(&[r, s]) => {
                if alg.add(r, s) != alg.one() {
                    return Err(Error::InvalidDatum(format!("{} + {} is not 1", alg.label(r), alg.label(s))));
                }
            }
            (SpectralContext::Domain, CellDatum::ZeroProduct { a, b }) if in_range(&[a, b]) => {
                if Some(alg.mul(a, b)) != alg.zero() {
                    return Err(Error::InvalidDatum(format!("{} · {} is not 0", alg.label(a), alg.label(b))));
                }
            }
            (SpectralContext::Deitmar, CellDatum::Element { a }) if a < n => {}
            _ => return Err(Error::InvalidDatum(format!("{d:?} is not a {self} cell datum"))),
        }
        Ok(())
    }

    /// Whether the branch already holds in `alg`, i.e. the cell lifts along the identity.
    pub fn branch_holds(&self, alg: &FiniteAlgebra, d: &CellDatum, b: Branch) -> bool {
        match (*d, b) {
            (CellDatum::Partition { r, .. }, Branch::Left) => alg.is_unit(r),
            (CellDatum::Partition { s, .. }, Branch::Right) => alg.is_unit(s),
            (CellDatum::ZeroProduct { a, .. }, Branch::Left) => Some(a) == alg.zero(),
            (CellDatum::ZeroProduct { b, .. }, Branch::Right) => Some(b) == alg.zero(),
            (CellDatum::Element { .. }, Branch::Left) => true,
            (CellDatum::Element { a }, Branch::Right) => alg.is_unit(a),
        }
    }

    /// Pushout of the branch along the datum: the universal algebra where the branch holds.
    pub fn attach_cell(&self, alg: &Arc<FiniteAlgebra>, d: &CellDatum, b: Branch) -> Result<(Arc<FiniteAlgebra>, Hom)> {
        self.validate_datum(alg, d)?;
        match (*d, b) {
            (CellDatum::Partition { r, .. }, Branch::Left) | (CellDatum::Element { a: r }, Branch::Right) => {
                invert_element(alg, r)
            }
            (CellDatum::Partition { s, .. }, Branch::Right) => invert_element(alg, s),
            (CellDatum::ZeroProduct { a, .. }, Branch::Left) | (CellDatum::ZeroProduct { b: a, .. }, Branch::Right) => {
                quotient(alg, &QuotientBy::Ideal(Ideal::generated(alg, &[a])))
            }
            (CellDatum::Element { .. }, Branch::Left) => Ok((alg.clone(), Hom::identity(alg))),
        }
    }

    /// Direct test: nontrivial local ring, integral domain, or any monoid.
    pub fn is_local(&self, a: &FiniteAlgebra) -> bool {
        match self {
            SpectralContext::Zariski => {
                if a.is_trivial() {
                    return false;
                }
                let non_units: Vec<usize> = (0..a.len()).filter(|&x| !a.is_unit(x)).collect();
                non_units.iter().all(|&x| non_units.iter().all(|&y| !a.is_unit(a.add(x, y))))
            }
            SpectralContext::Domain => {
                let Some(z) = a.zero() else { return false };
                !a.is_trivial() && (0..a.len()).all(|x| x == z || (0..a.len()).all(|y| y == z || a.mul(x, y) != z))
            }
            SpectralContext::Deitmar => true,
        }
    }

    /// Local via the cone system: not deleted and every datum has a branch that already holds.
    pub fn is_local_by_cells(&self, a: &FiniteAlgebra) -> bool {
        !self.deletes(a)
            && self
                .cell_data(a)
                .iter()
                .all(|d| [Branch::Left, Branch::Right].iter().any(|&b| self.branch_holds(a, d, b)))
    }

    /// Direct test: reflects invertibility, or is injective.
    pub fn is_admissible(&self, f: &Hom) -> bool {
        let (s, t) = (f.source(), f.target());
        match self {
            SpectralContext::Zariski | SpectralContext::Deitmar => {
                (0..s.len()).all(|x| s.is_unit(x) || !t.is_unit(f.apply(x)))
            }
            SpectralContext::Domain => f.is_injective(),
        }
    }

    /// Admissible via lifting: whenever a branch holds after `f`, it already held before.
    pub fn is_admissible_by_cells(&self, f: &Hom) -> bool {
        let (s, t) = (f.source(), f.target());
        self.cell_data(s).iter().all(|d| {
            let img = d.map(f);
            [Branch::Left, Branch::Right].iter().all(|&b| !self.branch_holds(t, &img, b) || self.branch_holds(s, d, b))
        })
    }

    /// The prime of `R` a local form corresponds to.
    pub fn prime_of(&self, p: &Localization) -> Ideal {
        let (r, k) = (p.source(), p.target());
        let members = (0..r.len()).filter(|&x| {
            let y = p.map().apply(x);
            match self {
                SpectralContext::Domain => Some(y) == k.zero(),
                _ => !k.is_unit(y),
            }
        });
        Ideal::new(members.collect())
    }

    /// Prime ideals of `R` as points are indexed: prime ring ideals, or monoid primes including `∅`.
    pub fn primes(&self, r: &FiniteAlgebra) -> Vec<Ideal> {
        match self.kind() {
            AlgebraKind::Ring => prime_ideals(r),
            AlgebraKind::Monoid => monoid_primes(r),
        }
    }
}

/// A finite composite of cell attachments out of `R`, with its composite map.
#[derive(Clone, Debug)]
pub struct Localization {
    steps: Vec<CellStep>,
    map: Hom,
}

/// A localization whose target is local.
pub type LocalForm = Localization;

impl Localization {
    pub fn identity(r: &Arc<FiniteAlgebra>) -> Self {
        Localization { steps: Vec::new(), map: Hom::identity(r) }
    }

    pub fn source(&self) -> &Arc<FiniteAlgebra> {
        self.map.source()
    }

    pub fn target(&self) -> &Arc<FiniteAlgebra> {
        self.map.target()
    }

    pub fn map(&self) -> &Hom {
        &self.map
    }

    pub fn steps(&self) -> &[CellStep] {
        &self.steps
    }

    /// Attaches one more cell at the current target.
    pub fn extend(&self, ctx: SpectralContext, datum: CellDatum, branch: Branch) -> Result<(Localization, Hom)> {
        let (_, q) = ctx.attach_cell(self.target(), &datum, branch)?;
        let mut steps = self.steps.clone();
        steps.push(CellStep { datum, branch });
        Ok((Localization { steps, map: self.map.then(&q)? }, q))
    }

    /// Rebuilds a localization from recorded steps.
    pub fn replay(ctx: SpectralContext, r: &Arc<FiniteAlgebra>, steps: &[CellStep]) -> Result<Localization> {
        let mut loc = Localization::identity(r);
        for s in steps {
            loc = loc.extend(ctx, s.datum, s.branch)?.0;
        }
        Ok(loc)
    }

    /// `next ∘ self` for a localization `next` of `self.target()`.
    pub fn then(&self, next: &Localization) -> Result<Localization> {
        let map = self.map.then(next.map())?;
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&next.steps);
        Ok(Localization { steps, map })
    }

    /// Pushout along `f : R → S`: the same cells attached over `S`, with the induced map
    /// `K → K ⊗_R S`.
    pub fn push_forward(&self, ctx: SpectralContext, f: &Hom) -> Result<(Localization, Hom)> {
        let mut here = Hom::identity(self.source());
        let mut there = Localization::identity(f.target());
        let mut across = f.clone();
        for step in &self.steps {
            let (_, q) = ctx.attach_cell(here.target(), &step.datum, step.branch)?;
            let moved = step.datum.map(&across);
            let (next, q2) = there.extend(ctx, moved, step.branch)?;
            across = descend(&across.then(&q2)?, &q)?;
            here = here.then(&q)?;
            there = next;
        }
        if here.map() != self.map.map() {
            return Err(Error::InvariantViolation("replayed path does not match its composite".into()));
        }
        let across = across.rebase(self.target().clone(), there.target().clone())?;
        Ok((there, across))
    }

    /// Kernel congruence. Localizations of finite algebras are surjective, so this
    /// determines the localization up to isomorphism under `R`.
    pub fn key(&self) -> Congruence {
        self.map.kernel()
    }

    pub fn is_iso_to(&self, other: &Localization) -> bool {
        iso_under(&self.map, &other.map).is_some()
    }

    /// The map `K → self.target` under `R` when `self` factors through `k`.
    pub fn through(&self, k: &Localization) -> Option<Hom> {
        hom_under(&k.map, &self.map)
    }
}

/// `f = admissible ∘ localization`.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub localization: Localization,
    pub admissible: Hom,
}

fn ordered(mut data: Vec<CellDatum>, order: CellOrder, pass: u64) -> Vec<CellDatum> {
    match order {
        CellOrder::Forward => data,
        CellOrder::Reverse => {
            data.reverse();
            data
        }
        CellOrder::Shuffled(seed) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(pass));
            data.shuffle(&mut rng);
            data
        }
    }
}

/// `g' ∘ q = g` for a surjective `q`.
pub fn descend(g: &Hom, q: &Hom) -> Result<Hom> {
    let mut map = vec![usize::MAX; q.target().len()];
    for x in 0..q.source().len() {
        let (y, v) = (q.apply(x), g.apply(x));
        if map[y] == usize::MAX {
            map[y] = v;
        } else if map[y] != v {
            return Err(Error::InvariantViolation("map does not descend along a quotient".into()));
        }
    }
    if map.contains(&usize::MAX) {
        return Err(Error::InvariantViolation("descent along a non-surjective map".into()));
    }
    Hom::new(q.target().clone(), g.target().clone(), map)
}

impl SpectralContext {
    /// Factors `f` as a localization followed by an admissible map, attaching every cell
    /// that `f` forces until none is left.
    pub fn factorize(&self, f: &Hom, order: CellOrder) -> Result<Factorization> {
        let (localization, mut legs) = self.factorize_family(f.source(), std::slice::from_ref(f), order)?;
        let admissible = legs.pop().unwrap();
        debug_assert!(self.is_admissible(&admissible));
        Ok(Factorization { localization, admissible })
    }

    /// Factorization of a jointly given map `R → Π targets` without forming the product:
    /// a branch holds in a product exactly when it holds in every factor.
    pub fn factorize_family(
        &self,
        source: &Arc<FiniteAlgebra>,
        legs: &[Hom],
        order: CellOrder,
    ) -> Result<(Localization, Vec<Hom>)> {
        self.check_algebra(source)?;
        let mut loc = Localization::identity(source);
        let mut gs: Vec<Hom> = legs.to_vec();
        for pass in 0.. {
            let k = loc.target().clone();
            let found = ordered(self.cell_data(&k), order, pass).into_iter().find_map(|d| {
                [Branch::Left, Branch::Right]
                    .into_iter()
                    .find(|&b| {
                        !self.branch_holds(&k, &d, b) && gs.iter().all(|g| self.branch_holds(g.target(), &d.map(g), b))
                    })
                    .map(|b| (d, b))
            });
            let Some((d, b)) = found else { break };
            let (next, q) = loc.extend(*self, d, b)?;
            gs = gs.iter().map(|g| descend(g, &q)).collect::<Result<_>>()?;
            loc = next;
        }
        Ok((loc, gs))
    }

    /// Admissibility of the induced map into a product.
    pub fn is_admissible_family(&self, source: &FiniteAlgebra, legs: &[Hom]) -> bool {
        match self {
            SpectralContext::Zariski | SpectralContext::Deitmar => {
                (0..source.len()).all(|x| source.is_unit(x) || !legs.iter().all(|g| g.target().is_unit(g.apply(x))))
            }
            SpectralContext::Domain => {
                let mut seen = std::collections::HashSet::new();
                (0..source.len()).all(|x| seen.insert(legs.iter().map(|g| g.apply(x)).collect::<Vec<_>>()))
            }
        }
    }

    /// Local forms of `R`, one per prime, sorted by target size then kernel.
    pub fn local_forms(&self, r: &Arc<FiniteAlgebra>) -> Result<Vec<LocalForm>> {
        self.check_algebra(r)?;
        let mut out: BTreeMap<(usize, Congruence), Localization> = BTreeMap::new();
        for p in self.primes(r) {
            let loc = match self {
                SpectralContext::Zariski | SpectralContext::Deitmar => {
                    let s = (0..r.len()).filter(|&x| !p.contains(x)).fold(r.one(), |acc, x| r.mul(acc, x));
                    let d = match self {
                        SpectralContext::Zariski => CellDatum::Partition { r: s, s: r.sub(r.one(), s) },
                        _ => CellDatum::Element { a: s },
                    };
                    let b = if *self == SpectralContext::Zariski { Branch::Left } else { Branch::Right };
                    if r.is_unit(s) {
                        Localization::identity(r)
                    } else {
                        Localization::identity(r).extend(*self, d, b)?.0
                    }
                }
                SpectralContext::Domain => {
                    let mut loc = Localization::identity(r);
                    for &x in p.members() {
                        let y = loc.map().apply(x);
                        let k = loc.target().clone();
                        if Some(y) != k.zero() {
                            let d = CellDatum::ZeroProduct { a: y, b: k.zero().unwrap() };
                            loc = loc.extend(*self, d, Branch::Left)?.0;
                        }
                    }
                    loc
                }
            };
            if !self.is_local(loc.target()) {
                return Err(Error::InvariantViolation(format!("localization at a prime of {r:?} is not local")));
            }
            out.insert((loc.target().len(), loc.key()), loc);
        }
        Ok(out.into_values().collect())
    }

    /// Every finite localization of `R` up to isomorphism, by breadth-first cell attachment.
    /// The first path found for each class is kept.
    pub fn finite_localizations(&self, r: &Arc<FiniteAlgebra>) -> Result<Vec<Localization>> {
        self.check_algebra(r)?;
        let mut seen: BTreeMap<Congruence, usize> = BTreeMap::new();
        let mut out = vec![Localization::identity(r)];
        seen.insert(out[0].key(), 0);
        let mut i = 0;
        while i < out.len() {
            let cur = out[i].clone();
            let k = cur.target().clone();
            for d in self.cell_data(&k) {
                for b in [Branch::Left, Branch::Right] {
                    if self.branch_holds(&k, &d, b) {
                        continue;
                    }
                    let (next, _) = cur.extend(*self, d, b)?;
                    let key = next.key();
                    if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(key) {
                        e.insert(out.len());
                        out.push(next);
                    }
                }
            }
            i += 1;
        }
        Ok(out)
    }

    /// Children of a localization in one saturation round: attach one branch at every datum.
    fn saturation_children(&self, k: &Localization) -> Result<Vec<Localization>> {
        let base = k.target().clone();
        let mut states: BTreeMap<Congruence, (Localization, Hom)> = BTreeMap::new();
        states.insert(k.key(), (k.clone(), Hom::identity(&base)));
        for d in self.cell_data(&base) {
            let mut next: BTreeMap<Congruence, (Localization, Hom)> = BTreeMap::new();
            for (loc, from_base) in states.values() {
                let img = d.map(from_base);
                for b in [Branch::Left, Branch::Right] {
                    let child = if self.branch_holds(loc.target(), &img, b) {
                        (loc.clone(), from_base.clone())
                    } else {
                        let (l2, q) = loc.extend(*self, img, b)?;
                        if self.deletes(l2.target()) {
                            continue;
                        }
                        let fb = from_base.then(&q)?;
                        (l2, fb)
                    };
                    next.entry(child.0.key()).or_insert(child);
                }
            }
            states = next;
        }
        Ok(states.into_values().map(|(l, _)| l).collect())
    }

    /// Small-object saturation: rounds of simultaneous cell attachment with deduplication,
    /// until the family stops changing. Returns the local forms and the rounds used.
    pub fn saturate_bounded(&self, r: &Arc<FiniteAlgebra>, max_rounds: usize) -> Result<Saturation> {
        self.check_algebra(r)?;
        let mut family: BTreeMap<Congruence, Localization> = BTreeMap::new();
        if !self.deletes(r) {
            family.insert(Localization::identity(r).key(), Localization::identity(r));
        }
        for round in 1..=max_rounds {
            let mut next: BTreeMap<Congruence, Localization> = BTreeMap::new();
            for k in family.values() {
                for c in self.saturation_children(k)? {
                    next.entry(c.key()).or_insert(c);
                }
            }
            let stable = next.keys().eq(family.keys());
            family = next;
            if stable {
                let mut forms: Vec<Localization> = family.into_values().collect();
                if let Some(bad) = forms.iter().find(|f| !self.is_local(f.target())) {
                    return Err(Error::InvariantViolation(format!("saturation kept a non-local {:?}", bad.target())));
                }
                forms.sort_by_key(|a| (a.target().len(), a.key()));
                return Ok(Saturation { forms, rounds: round });
            }
        }
        Err(Error::DidNotStabilize(max_rounds))
    }
}

#[derive(Clone, Debug)]
pub struct Saturation {
    pub forms: Vec<LocalForm>,
    pub rounds: usize,
}
