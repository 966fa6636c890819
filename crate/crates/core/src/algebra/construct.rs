use std::collections::HashMap;
use std::sync::Arc;

use super::{check_size, AlgebraKind, FiniteAlgebra, Hom};
use crate::error::{Error, Result};

fn tuple_label(parts: impl Iterator<Item = String>) -> String {
    format!("({})", parts.collect::<Vec<_>>().join(","))
}

/// Cartesian product with its projections.
pub fn product(
    kind: AlgebraKind,
    factors: &[Arc<FiniteAlgebra>],
    bound: usize,
) -> Result<(Arc<FiniteAlgebra>, Vec<Hom>)> {
    let mut size: usize = 1;
    for f in factors {
        if f.kind() != kind {
            return Err(Error::KindMismatch(format!("{} factor in a {kind} product", f.kind())));
        }
        size = size.saturating_mul(f.len());
        check_size(size, bound)?;
    }
    let k = factors.len();
    let mut stride = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * factors[i + 1].len();
    }
    let coord = |x: usize, i: usize| (x / stride[i]) % factors[i].len();
    let encode = |c: &dyn Fn(usize) -> usize| (0..k).map(|i| c(i) * stride[i]).sum::<usize>();
    let labels = (0..size).map(|x| tuple_label((0..k).map(|i| factors[i].label(coord(x, i)).to_string()))).collect();
    let mul = |a: usize, b: usize| encode(&|i| factors[i].mul(coord(a, i), coord(b, i)));
    let add = |a: usize, b: usize| encode(&|i| factors[i].add(coord(a, i), coord(b, i)));
    let one = encode(&|i| factors[i].one());
    let zero = (kind == AlgebraKind::Ring).then(|| encode(&|i| factors[i].zero().unwrap()));
    let p = Arc::new(FiniteAlgebra::tabulate(
        kind,
        labels,
        (kind == AlgebraKind::Ring).then_some(&add as &dyn Fn(usize, usize) -> usize),
        &mul,
        zero,
        one,
    ));
    let projections = (0..k)
        .map(|i| Hom::new_unchecked(p.clone(), factors[i].clone(), (0..size).map(|x| coord(x, i) as u32).collect()))
        .collect();
    Ok((p, projections))
}

/// A finite diagram: objects and arrows `(from, to, hom)`.
#[derive(Clone, Debug)]
pub struct Diagram {
    pub kind: AlgebraKind,
    pub objects: Vec<Arc<FiniteAlgebra>>,
    pub arrows: Vec<(usize, usize, Hom)>,
}

impl Diagram {
    pub fn new(kind: AlgebraKind) -> Self {
        Diagram { kind, objects: Vec::new(), arrows: Vec::new() }
    }

    pub fn object(&mut self, a: Arc<FiniteAlgebra>) -> usize {
        self.objects.push(a);
        self.objects.len() - 1
    }

    pub fn arrow(&mut self, from: usize, to: usize, h: Hom) {
        self.arrows.push((from, to, h));
    }
}

/// A limit realized as compatible tuples.
#[derive(Clone, Debug)]
pub struct Limit {
    pub apex: Arc<FiniteAlgebra>,
    pub projections: Vec<Hom>,
    tuples: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, u32>,
}

impl Limit {
    pub fn tuple(&self, x: usize) -> &[u32] {
        &self.tuples[x]
    }

    pub fn lookup(&self, t: &[u32]) -> Option<usize> {
        self.index.get(t).map(|&x| x as usize)
    }

    /// The map induced by a cone over the same diagram.
    pub fn lift(&self, source: &Arc<FiniteAlgebra>, legs: &[Hom]) -> Result<Hom> {
        let mut map = Vec::with_capacity(source.len());
        for x in 0..source.len() {
            let t: Vec<u32> = legs.iter().map(|h| h.apply(x) as u32).collect();
            let v = self.lookup(&t).ok_or_else(|| Error::InvariantViolation("cone legs are not compatible".into()))?;
            map.push(v as u32);
        }
        Ok(Hom::new_unchecked(source.clone(), self.apex.clone(), map))
    }
}

/// Limit of a finite diagram, by backtracking with forced values along arrows.
pub fn limit(d: &Diagram, bound: usize) -> Result<Limit> {
    let k = d.objects.len();
    for (from, to, h) in &d.arrows {
        if h.source().len() != d.objects[*from].len() || h.target().len() != d.objects[*to].len() {
            return Err(Error::KindMismatch("arrow does not match its endpoints".into()));
        }
    }
    if d.objects.iter().any(|o| o.kind() != d.kind) {
        return Err(Error::KindMismatch("mixed kinds in a diagram".into()));
    }
    // Each object without incoming arrows, followed at once by whatever it forces.
    let mut order = Vec::with_capacity(k);
    let mut placed = vec![false; k];
    let has_incoming: Vec<bool> = (0..k).map(|i| d.arrows.iter().any(|(f, t, _)| *t == i && *f != i)).collect();
    let push = |i: usize, order: &mut Vec<usize>, placed: &mut Vec<bool>| {
        if !placed[i] {
            placed[i] = true;
            order.push(i);
        }
    };
    let close = |order: &mut Vec<usize>, placed: &mut Vec<bool>| {
        let mut changed = true;
        while changed {
            changed = false;
            for (f, t, _) in &d.arrows {
                if placed[*f] && !placed[*t] {
                    push(*t, order, placed);
                    changed = true;
                }
            }
        }
    };
    for i in 0..k {
        if !has_incoming[i] && !placed[i] {
            push(i, &mut order, &mut placed);
            close(&mut order, &mut placed);
        }
    }
    for i in 0..k {
        push(i, &mut order, &mut placed);
    }
    let mut pos = vec![0; k];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    // For each object: arrows to check once it is assigned, and one forcing arrow if any.
    let mut checks: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut forced_by: Vec<Option<usize>> = vec![None; k];
    for (ai, (f, t, _)) in d.arrows.iter().enumerate() {
        let later = if pos[*f] >= pos[*t] { *f } else { *t };
        checks[later].push(ai);
        if pos[*f] < pos[*t] && forced_by[*t].is_none() {
            forced_by[*t] = Some(ai);
        }
    }
    let mut tuples: Vec<Vec<u32>> = Vec::new();
    let mut cur = vec![0u32; k];
    fn rec(
        depth: usize,
        d: &Diagram,
        order: &[usize],
        checks: &[Vec<usize>],
        forced_by: &[Option<usize>],
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
        bound: usize,
    ) -> Result<()> {
        if depth == order.len() {
            out.push(cur.clone());
            check_size(out.len(), bound)?;
            return Ok(());
        }
        let i = order[depth];
        let candidates: Vec<u32> = match forced_by[i] {
            Some(ai) => {
                let (f, _, h) = &d.arrows[ai];
                vec![h.apply(cur[*f] as usize) as u32]
            }
            None => (0..d.objects[i].len() as u32).collect(),
        };
        'next: for v in candidates {
            cur[i] = v;
            for &ai in &checks[i] {
                let (f, t, h) = &d.arrows[ai];
                if h.apply(cur[*f] as usize) as u32 != cur[*t] {
                    continue 'next;
                }
            }
            rec(depth + 1, d, order, checks, forced_by, cur, out, bound)?;
        }
        Ok(())
    }
    rec(0, d, &order, &checks, &forced_by, &mut cur, &mut tuples, bound)?;
    tuples.sort();
    let index: HashMap<Vec<u32>, u32> = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
    let look = |t: Vec<u32>| index[&t] as usize;
    let labels =
        tuples.iter().map(|t| tuple_label((0..k).map(|i| d.objects[i].label(t[i] as usize).to_string()))).collect();
    let comb = |a: usize, b: usize, op: &dyn Fn(&FiniteAlgebra, usize, usize) -> usize| {
        look((0..k).map(|i| op(&d.objects[i], tuples[a][i] as usize, tuples[b][i] as usize) as u32).collect())
    };
    let mul = |a: usize, b: usize| comb(a, b, &|o, x, y| o.mul(x, y));
    let add = |a: usize, b: usize| comb(a, b, &|o, x, y| o.add(x, y));
    let one = look(d.objects.iter().map(|o| o.one() as u32).collect());
    let zero =
        (d.kind == AlgebraKind::Ring).then(|| look(d.objects.iter().map(|o| o.zero().unwrap() as u32).collect()));
    let apex = Arc::new(FiniteAlgebra::tabulate(
        d.kind,
        labels,
        (d.kind == AlgebraKind::Ring).then_some(&add as &dyn Fn(usize, usize) -> usize),
        &mul,
        zero,
        one,
    ));
    let projections = (0..k)
        .map(|i| Hom::new_unchecked(apex.clone(), d.objects[i].clone(), tuples.iter().map(|t| t[i]).collect()))
        .collect();
    Ok(Limit { apex, projections, tuples, index })
}

/// Sub-algebra on a set of elements closed under the operations.
pub(crate) fn subalgebra(alg: &Arc<FiniteAlgebra>, members: &[usize]) -> Result<(Arc<FiniteAlgebra>, Hom)> {
    let mut pos = vec![usize::MAX; alg.len()];
    for (i, &m) in members.iter().enumerate() {
        pos[m] = i;
    }
    let look = |x: usize| {
        let p = pos[x];
        if p == usize::MAX {
            Err(Error::InvariantViolation("subset is not closed".into()))
        } else {
            Ok(p)
        }
    };
    let n = members.len();
    let mut mul = Vec::with_capacity(n * n);
    let mut add = alg.is_ring().then(|| Vec::with_capacity(n * n));
    for &a in members {
        for &b in members {
            mul.push(look(alg.mul(a, b))? as u32);
            if let Some(t) = add.as_mut() {
                t.push(look(alg.add(a, b))? as u32);
            }
        }
    }
    let zero = match alg.zero() {
        Some(z) => Some(look(z)?),
        None => None,
    };
    let one = look(alg.one())?;
    let labels = members.iter().map(|&m| alg.label(m).to_string()).collect();
    let s = Arc::new(FiniteAlgebra::from_flat(alg.kind(), labels, add, mul, zero, one));
    let inc = Hom::new_unchecked(s.clone(), alg.clone(), members.iter().map(|&m| m as u32).collect());
    Ok((s, inc))
}

/// `{a : f(a) = g(a)}` as a sub-algebra of the common source.
pub fn equalizer(f: &Hom, g: &Hom) -> Result<(Arc<FiniteAlgebra>, Hom)> {
    if f.source().len() != g.source().len() || f.target().len() != g.target().len() {
        return Err(Error::KindMismatch("maps are not parallel".into()));
    }
    let members: Vec<usize> = (0..f.source().len()).filter(|&a| f.apply(a) == g.apply(a)).collect();
    subalgebra(f.source(), &members)
}

/// Fibre product `A ×_C B`.
pub fn pullback(f: &Hom, g: &Hom, bound: usize) -> Result<Limit> {
    let mut d = Diagram::new(f.source().kind());
    let a = d.object(f.source().clone());
    let b = d.object(g.source().clone());
    let c = d.object(f.target().clone());
    d.arrow(a, c, f.clone());
    d.arrow(b, c, g.clone());
    limit(&d, bound)
}
