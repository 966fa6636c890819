use std::fmt;
use std::sync::Arc;

use super::{Congruence, FiniteAlgebra};
use crate::error::{Error, Result};

/// A structure-preserving map between two finite algebras of the same kind.
#[derive(Clone)]
pub struct Hom {
    source: Arc<FiniteAlgebra>,
    target: Arc<FiniteAlgebra>,
    map: Vec<u32>,
}

impl fmt::Debug for Hom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hom[{}->{}]{:?}", self.source.len(), self.target.len(), self.map)
    }
}

impl PartialEq for Hom {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map && same(&self.source, &other.source) && same(&self.target, &other.target)
    }
}

impl Eq for Hom {}

pub(crate) fn same(a: &Arc<FiniteAlgebra>, b: &Arc<FiniteAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Hom {
    /// Builds a map and checks that it preserves all operations and constants.
    pub fn new(source: Arc<FiniteAlgebra>, target: Arc<FiniteAlgebra>, map: Vec<usize>) -> Result<Self> {
        source.check_kind(&target)?;
        if map.len() != source.len() || map.iter().any(|&x| x >= target.len()) {
            return Err(Error::InvalidDatum("map has the wrong length or range".into()));
        }
        let h = Self::new_unchecked(source, target, map.into_iter().map(|x| x as u32).collect());
        if let Some((a, b)) = h.violation() {
            return Err(Error::InvalidDatum(format!(
                "map does not preserve the operations at ({}, {})",
                h.source.label(a),
                h.source.label(b)
            )));
        }
        Ok(h)
    }

    pub(crate) fn new_unchecked(source: Arc<FiniteAlgebra>, target: Arc<FiniteAlgebra>, map: Vec<u32>) -> Self {
        debug_assert_eq!(map.len(), source.len());
        Hom { source, target, map }
    }

    pub fn identity(a: &Arc<FiniteAlgebra>) -> Self {
        Hom::new_unchecked(a.clone(), a.clone(), (0..a.len() as u32).collect())
    }

    pub fn source(&self) -> &Arc<FiniteAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteAlgebra> {
        &self.target
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x] as usize
    }

    pub fn map(&self) -> Vec<usize> {
        self.map.iter().map(|&x| x as usize).collect()
    }

    /// First pair of elements where an operation is not preserved, if any.
    fn violation(&self) -> Option<(usize, usize)> {
        let (s, t) = (&*self.source, &*self.target);
        let f = |x: usize| self.map[x] as usize;
        if f(s.one()) != t.one() {
            return Some((s.one(), s.one()));
        }
        if let (Some(zs), Some(zt)) = (s.zero(), t.zero()) {
            if f(zs) != zt {
                return Some((zs, zs));
            }
        }
        for a in 0..s.len() {
            for b in a..s.len() {
                if f(s.mul(a, b)) != t.mul(f(a), f(b)) {
                    return Some((a, b));
                }
                if s.is_ring() && f(s.add(a, b)) != t.add(f(a), f(b)) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    pub fn is_hom(&self) -> bool {
        self.violation().is_none()
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &Hom) -> Result<Hom> {
        if !same(&self.target, &g.source) {
            return Err(Error::KindMismatch("maps are not composable".into()));
        }
        Ok(Hom::new_unchecked(
            self.source.clone(),
            g.target.clone(),
            self.map.iter().map(|&x| g.map[x as usize]).collect(),
        ))
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        for &x in &self.map {
            if std::mem::replace(&mut seen[x as usize], true) {
                return false;
            }
        }
        true
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        for &x in &self.map {
            seen[x as usize] = true;
        }
        seen.into_iter().all(|b| b)
    }

    pub fn is_bijective(&self) -> bool {
        self.source.len() == self.target.len() && self.is_injective()
    }

    pub fn inverse(&self) -> Option<Hom> {
        if !self.is_bijective() {
            return None;
        }
        let mut inv = vec![0u32; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Some(Hom::new_unchecked(self.target.clone(), self.source.clone(), inv))
    }

    pub fn kernel(&self) -> Congruence {
        Congruence::from_classes(self.map.iter().map(|&x| x as usize).collect())
    }

    /// Same map with a structurally equal source or target swapped in.
    pub fn rebase(&self, source: Arc<FiniteAlgebra>, target: Arc<FiniteAlgebra>) -> Result<Hom> {
        if !same(&self.source, &source) || !same(&self.target, &target) {
            return Err(Error::KindMismatch("rebase onto a different algebra".into()));
        }
        Ok(Hom::new_unchecked(source, target, self.map.clone()))
    }
}

#[derive(Clone, Copy)]
enum Op {
    Mul,
    Add,
}

enum Action {
    Fixed(usize),
    Gen(usize),
    Derive(usize, Op, usize, usize),
}

/// Evaluation order for a hom search: generators, fixed images and derived elements.
struct Plan {
    actions: Vec<Action>,
}

fn plan(a: &FiniteAlgebra, fixed: &[Option<usize>]) -> Plan {
    let n = a.len();
    let mut known = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut actions = Vec::with_capacity(n);
    let seed = |x: usize, known: &mut Vec<bool>, order: &mut Vec<usize>, actions: &mut Vec<Action>| {
        if !known[x] {
            known[x] = true;
            order.push(x);
            actions.push(Action::Fixed(x));
        }
    };
    seed(a.one(), &mut known, &mut order, &mut actions);
    if let Some(z) = a.zero() {
        seed(z, &mut known, &mut order, &mut actions);
    }
    for (x, f) in fixed.iter().enumerate() {
        if f.is_some() {
            seed(x, &mut known, &mut order, &mut actions);
        }
    }
    let ops: &[Op] = if a.is_ring() { &[Op::Mul, Op::Add] } else { &[Op::Mul] };
    let mut i = 0;
    loop {
        while i < order.len() {
            let x = order[i];
            for j in 0..=i {
                let y = order[j];
                for &op in ops {
                    let z = match op {
                        Op::Mul => a.mul(x, y),
                        Op::Add => a.add(x, y),
                    };
                    if !known[z] {
                        known[z] = true;
                        order.push(z);
                        actions.push(Action::Derive(z, op, x, y));
                    }
                }
            }
            i += 1;
        }
        match known.iter().position(|&k| !k) {
            Some(u) => {
                known[u] = true;
                order.push(u);
                actions.push(Action::Gen(u));
            }
            None => break,
        }
    }
    Plan { actions }
}

struct Search<'a> {
    a: &'a FiniteAlgebra,
    b: &'a FiniteAlgebra,
    fixed: &'a [Option<usize>],
    plan: Plan,
    injective: bool,
    img: Vec<u32>,
    used: Vec<bool>,
    assigned: Vec<usize>,
}

const UNSET: u32 = u32::MAX;

impl Search<'_> {
    fn image_of_constant(&self, x: usize) -> usize {
        if let Some(v) = self.fixed[x] {
            return v;
        }
        if x == self.a.one() {
            return self.b.one();
        }
        self.b.zero().expect("zero of ring")
    }

    /// Assigns `x ↦ v`, checking injectivity and every operation among assigned elements.
    fn assign(&mut self, x: usize, v: usize) -> bool {
        if self.img[x] != UNSET {
            return self.img[x] as usize == v;
        }
        if self.injective && self.used[v] {
            return false;
        }
        self.img[x] = v as u32;
        self.used[v] = true;
        self.assigned.push(x);
        let (a, b) = (self.a, self.b);
        for k in 0..self.assigned.len() {
            let y = self.assigned[k];
            let w = self.img[y] as usize;
            for (z, t) in
                [(a.mul(x, y), b.mul(v, w))].into_iter().chain(a.is_ring().then(|| (a.add(x, y), b.add(v, w))))
            {
                let iz = self.img[z];
                if iz != UNSET && iz as usize != t {
                    return false;
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.assigned.len() > mark {
            let x = self.assigned.pop().unwrap();
            let v = self.img[x] as usize;
            self.img[x] = UNSET;
            self.used[v] = false;
        }
    }

    /// Runs actions from `pos` until the next generator; returns that generator's position.
    fn advance(&mut self, mut pos: usize) -> Option<usize> {
        while pos < self.plan.actions.len() {
            let ok = match self.plan.actions[pos] {
                Action::Fixed(x) => {
                    let v = self.image_of_constant(x);
                    self.assign(x, v)
                }
                Action::Derive(z, op, x, y) => {
                    let (vx, vy) = (self.img[x] as usize, self.img[y] as usize);
                    let v = match op {
                        Op::Mul => self.b.mul(vx, vy),
                        Op::Add => self.b.add(vx, vy),
                    };
                    self.assign(z, v)
                }
                Action::Gen(_) => return Some(pos),
            };
            if !ok {
                return None;
            }
            pos += 1;
        }
        Some(pos)
    }

    fn run(&mut self, pos: usize, visit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        let mark = self.assigned.len();
        let next = match self.advance(pos) {
            Some(p) => p,
            None => {
                self.undo(mark);
                return true;
            }
        };
        if next == self.plan.actions.len() {
            let go = visit(&self.img);
            self.undo(mark);
            return go;
        }
        let g = match self.plan.actions[next] {
            Action::Gen(g) => g,
            _ => unreachable!(),
        };
        for v in 0..self.b.len() {
            let inner = self.assigned.len();
            if self.assign(g, v) && !self.run(next + 1, visit) {
                self.undo(mark);
                return false;
            }
            self.undo(inner);
        }
        self.undo(mark);
        true
    }
}

/// Enumerates homs `a → b` extending the partial assignment `fixed`.
/// `visit` returns `false` to stop early.
pub fn homs_with(
    a: &Arc<FiniteAlgebra>,
    b: &Arc<FiniteAlgebra>,
    fixed: &[Option<usize>],
    injective: bool,
    visit: &mut dyn FnMut(Hom) -> bool,
) {
    if a.kind() != b.kind() || fixed.len() != a.len() {
        return;
    }
    if injective && a.len() > b.len() {
        return;
    }
    let plan = plan(a, fixed);
    let mut s = Search {
        a,
        b,
        fixed,
        plan,
        injective,
        img: vec![UNSET; a.len()],
        used: vec![false; b.len()],
        assigned: Vec::with_capacity(a.len()),
    };
    // Partial checks prune; the full check below catches pairs whose product was assigned late.
    let mut inner = |img: &[u32]| {
        let h = Hom::new_unchecked(a.clone(), b.clone(), img.to_vec());
        if h.is_hom() {
            visit(h)
        } else {
            true
        }
    };
    s.run(0, &mut inner);
}

/// All homs `a → b`, in lexicographic order of generator images.
pub fn homs(a: &Arc<FiniteAlgebra>, b: &Arc<FiniteAlgebra>) -> Vec<Hom> {
    let mut out = Vec::new();
    homs_with(a, b, &vec![None; a.len()], false, &mut |h| {
        out.push(h);
        true
    });
    out
}

/// An isomorphism `a → b`, pruned by cheap invariants first.
pub fn find_isomorphism(a: &Arc<FiniteAlgebra>, b: &Arc<FiniteAlgebra>) -> Option<Hom> {
    if a.invariants() != b.invariants() {
        return None;
    }
    let mut found = None;
    homs_with(a, b, &vec![None; a.len()], true, &mut |h| {
        found = Some(h);
        false
    });
    found
}

fn under_constraints(f: &Hom, g: &Hom) -> Option<Vec<Option<usize>>> {
    if !same(f.source(), g.source()) {
        return None;
    }
    let mut fixed = vec![None; f.target().len()];
    for r in 0..f.source().len() {
        let (x, y) = (f.apply(r), g.apply(r));
        match fixed[x] {
            None => fixed[x] = Some(y),
            Some(v) if v != y => return None,
            _ => {}
        }
    }
    Some(fixed)
}

/// A hom `h` with `h ∘ f = g`, for `f: R → A`, `g: R → B`.
pub fn hom_under(f: &Hom, g: &Hom) -> Option<Hom> {
    let fixed = under_constraints(f, g)?;
    let mut found = None;
    homs_with(f.target(), g.target(), &fixed, false, &mut |h| {
        found = Some(h);
        false
    });
    found
}

/// An isomorphism `h` with `h ∘ f = g`.
pub fn iso_under(f: &Hom, g: &Hom) -> Option<Hom> {
    if f.target().len() != g.target().len() {
        return None;
    }
    let fixed = under_constraints(f, g)?;
    let mut found = None;
    homs_with(f.target(), g.target(), &fixed, true, &mut |h| {
        found = Some(h);
        false
    });
    found
}
