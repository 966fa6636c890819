//! `K ⊗_Z L` for finite rings, via a diagonal form of the relation matrix.

use std::sync::Arc;

use super::{check_size, AlgebraKind, FiniteAlgebra, Hom};
use crate::error::{Error, Result};

/// Additive presentation: coordinates of every element over greedy generators, plus relations.
struct Presentation {
    gens: Vec<usize>,
    coords: Vec<Vec<i128>>,
    relations: Vec<Vec<i128>>,
}

fn present(alg: &FiniteAlgebra) -> Presentation {
    let n = alg.len();
    let z = alg.zero().expect("ring");
    let mut coords: Vec<Option<Vec<i128>>> = vec![None; n];
    coords[z] = Some(Vec::new());
    let mut span = vec![z];
    let mut gens = Vec::new();
    let mut relations = Vec::new();
    while let Some(u) = (0..n).find(|&x| coords[x].is_none()) {
        let m = gens.len();
        gens.push(u);
        let (mut x, mut d) = (u, 1i128);
        while coords[x].is_none() {
            x = alg.add(x, u);
            d += 1;
        }
        let mut rel = coords[x].clone().unwrap();
        rel.resize(m, 0);
        for r in rel.iter_mut() {
            *r = -*r;
        }
        rel.push(d);
        relations.push(rel);
        let old = span.clone();
        for &s in &old {
            let base = coords[s].clone().unwrap();
            let mut e = s;
            for c in 1..d {
                e = alg.add(e, u);
                let mut v = base.clone();
                v.resize(m, 0);
                v.push(c);
                coords[e] = Some(v);
                span.push(e);
            }
        }
    }
    let k = gens.len();
    let coords = coords
        .into_iter()
        .map(|c| {
            let mut c = c.unwrap();
            c.resize(k, 0);
            c
        })
        .collect();
    for r in relations.iter_mut() {
        r.resize(k, 0);
    }
    Presentation { gens, coords, relations }
}

/// Diagonalizes `a` by unimodular row and column operations, tracking the column transform.
fn diagonalize(mut a: Vec<Vec<i128>>, n: usize) -> (Vec<i128>, Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let rows = a.len();
    let mut v: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    let mut vinv = v.clone();
    let swap_cols = |a: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, vinv: &mut Vec<Vec<i128>>, x: usize, y: usize| {
        for row in a.iter_mut() {
            row.swap(x, y);
        }
        for row in v.iter_mut() {
            row.swap(x, y);
        }
        vinv.swap(x, y);
    };
    let mut t = 0;
    while t < rows.min(n) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..n {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        swap_cols(&mut a, &mut v, &mut vinv, t, bj);
        loop {
            let p = a[t][t];
            for i in t + 1..rows {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in 0..n {
                        a[i][j] -= q * a[t][j];
                    }
                }
            }
            for j in t + 1..n {
                let q = a[t][j] / p;
                if q != 0 {
                    for row in a.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    for row in v.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    for c in 0..n {
                        vinv[t][c] += q * vinv[j][c];
                    }
                }
            }
            let mut best: Option<(usize, bool)> = None;
            let mut best_abs = p.abs();
            for i in t + 1..rows {
                if a[i][t] != 0 && a[i][t].abs() < best_abs {
                    best_abs = a[i][t].abs();
                    best = Some((i, true));
                }
            }
            for j in t + 1..n {
                if a[t][j] != 0 && a[t][j].abs() < best_abs {
                    best_abs = a[t][j].abs();
                    best = Some((j, false));
                }
            }
            match best {
                Some((i, true)) => a.swap(t, i),
                Some((j, false)) => swap_cols(&mut a, &mut v, &mut vinv, t, j),
                None => break,
            }
        }
        t += 1;
    }
    let d = (0..n).map(|k| if k < rows { a[k][k].abs() } else { 0 }).collect();
    (d, v, vinv)
}

pub(super) fn tensor_z(
    k: &Arc<FiniteAlgebra>,
    l: &Arc<FiniteAlgebra>,
    bound: usize,
) -> Result<(Arc<FiniteAlgebra>, Hom, Hom)> {
    let (pk, pl) = (present(k), present(l));
    let (m, mp) = (pk.gens.len(), pl.gens.len());
    let n = m * mp;
    let idx = |i: usize, j: usize| i * mp + j;
    let mut rows = Vec::new();
    for lam in &pk.relations {
        for j in 0..mp {
            let mut row = vec![0i128; n];
            for i in 0..m {
                row[idx(i, j)] = lam[i];
            }
            rows.push(row);
        }
    }
    for mu in &pl.relations {
        for i in 0..m {
            let mut row = vec![0i128; n];
            for j in 0..mp {
                row[idx(i, j)] = mu[j];
            }
            rows.push(row);
        }
    }
    let (d, v, vinv) = diagonalize(rows, n);
    if d.contains(&0) {
        return Err(Error::InvariantViolation("tensor product of finite groups came out infinite".into()));
    }
    let live: Vec<usize> = (0..n).filter(|&c| d[c] > 1).collect();
    let moduli: Vec<i128> = live.iter().map(|&c| d[c]).collect();
    let mut size: usize = 1;
    for &q in &moduli {
        size = size.saturating_mul(q as usize);
        check_size(size, bound)?;
    }
    // Smith coordinates of a vector over the basis e_i ⊗ f_j.
    let smith = |w: &[i128]| -> Vec<i128> {
        live.iter().zip(&moduli).map(|(&c, &q)| (0..n).map(|p| w[p] * v[p][c]).sum::<i128>().rem_euclid(q)).collect()
    };
    let encode = |c: &[i128]| c.iter().zip(&moduli).fold(0usize, |acc, (&x, &q)| acc * q as usize + x as usize);
    let decode = |mut x: usize| {
        let mut c = vec![0i128; moduli.len()];
        for i in (0..moduli.len()).rev() {
            let q = moduli[i] as usize;
            c[i] = (x % q) as i128;
            x /= q;
        }
        c
    };
    let pure = |x: usize, y: usize| -> Vec<i128> {
        let mut w = vec![0i128; n];
        for i in 0..m {
            for j in 0..mp {
                w[idx(i, j)] = pk.coords[x][i] * pl.coords[y][j];
            }
        }
        smith(&w)
    };
    // Products of basis tensors, then of lifted Smith basis vectors.
    let basis_prod = |p: usize, q: usize| {
        let (i, j) = (p / mp, p % mp);
        let (i2, j2) = (q / mp, q % mp);
        pure(k.mul(pk.gens[i], pk.gens[i2]), l.mul(pl.gens[j], pl.gens[j2]))
    };
    let mut bp = vec![vec![Vec::new(); n]; n];
    for p in 0..n {
        for q in 0..n {
            bp[p][q] = basis_prod(p, q);
        }
    }
    let r = live.len();
    let mut table = vec![vec![vec![0i128; r]; r]; r];
    for a in 0..r {
        for b in 0..r {
            let (la, lb) = (&vinv[live[a]], &vinv[live[b]]);
            let mut acc = vec![0i128; r];
            for p in 0..n {
                if la[p] == 0 {
                    continue;
                }
                for q in 0..n {
                    if lb[q] == 0 {
                        continue;
                    }
                    for c in 0..r {
                        acc[c] += la[p] * lb[q] * bp[p][q][c];
                    }
                }
            }
            for c in 0..r {
                table[a][b][c] = acc[c].rem_euclid(moduli[c]);
            }
        }
    }
    let elems: Vec<Vec<i128>> = (0..size).map(decode).collect();
    let add = |x: usize, y: usize| {
        let c: Vec<i128> = (0..r).map(|i| (elems[x][i] + elems[y][i]).rem_euclid(moduli[i])).collect();
        encode(&c)
    };
    let mul = |x: usize, y: usize| {
        let mut c = vec![0i128; r];
        for a in 0..r {
            if elems[x][a] == 0 {
                continue;
            }
            for b in 0..r {
                let s = elems[x][a] * elems[y][b];
                if s == 0 {
                    continue;
                }
                for i in 0..r {
                    c[i] += s * table[a][b][i];
                }
            }
        }
        for i in 0..r {
            c[i] = c[i].rem_euclid(moduli[i]);
        }
        encode(&c)
    };
    let labels =
        elems.iter().map(|c| format!("[{}]", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))).collect();
    let one = encode(&pure(k.one(), l.one()));
    let t = Arc::new(FiniteAlgebra::tabulate(AlgebraKind::Ring, labels, Some(&add), &mul, Some(0), one));
    let ik = (0..k.len()).map(|x| encode(&pure(x, l.one())) as u32).collect();
    let il = (0..l.len()).map(|y| encode(&pure(k.one(), y)) as u32).collect();
    Ok((t.clone(), Hom::new_unchecked(k.clone(), t.clone(), ik), Hom::new_unchecked(l.clone(), t, il)))
}
