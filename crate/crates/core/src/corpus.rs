//! Small named rings and monoids used as test inputs and as the default site.

use std::sync::Arc;

use crate::algebra::{product, AlgebraKind, FiniteAlgebra, DEFAULT_SIZE_BOUND};

fn ring_from(
    labels: Vec<String>,
    add: impl Fn(usize, usize) -> usize,
    mul: impl Fn(usize, usize) -> usize,
) -> FiniteAlgebra {
    let one = labels.iter().position(|l| l == "1").unwrap_or(0);
    FiniteAlgebra::tabulate(AlgebraKind::Ring, labels, Some(&add), &mul, Some(0), one)
}

fn monoid_from(labels: Vec<String>, mul: impl Fn(usize, usize) -> usize) -> FiniteAlgebra {
    FiniteAlgebra::tabulate(AlgebraKind::Monoid, labels, None, &mul, None, 0)
}

/// `Z/n`. `zmod(1)` is the zero ring.
pub fn zmod(n: usize) -> FiniteAlgebra {
    assert!(n >= 1);
    ring_from((0..n).map(|i| i.to_string()).collect(), |a, b| (a + b) % n, |a, b| (a * b) % n)
}

/// `F_p[x]/(x^k)`, elements indexed by base-`p` coefficient vectors.
pub fn truncated_poly(p: usize, k: usize) -> FiniteAlgebra {
    let n = p.pow(k as u32);
    let coeffs = |x: usize| (0..k).map(|i| (x / p.pow(i as u32)) % p).collect::<Vec<_>>();
    let enc = |c: &[usize]| c.iter().enumerate().map(|(i, &v)| v * p.pow(i as u32)).sum::<usize>();
    let label = |x: usize| {
        let c = coeffs(x);
        let terms: Vec<String> = c
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| match (i, v) {
                (0, v) => v.to_string(),
                (1, 1) => "x".into(),
                (1, v) => format!("{v}x"),
                (i, 1) => format!("x^{i}"),
                (i, v) => format!("{v}x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    };
    ring_from(
        (0..n).map(label).collect(),
        |a, b| {
            let (ca, cb) = (coeffs(a), coeffs(b));
            enc(&ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect::<Vec<_>>())
        },
        |a, b| {
            let (ca, cb) = (coeffs(a), coeffs(b));
            let mut c = vec![0; k];
            for i in 0..k {
                for j in 0..k - i {
                    c[i + j] = (c[i + j] + ca[i] * cb[j]) % p;
                }
            }
            enc(&c)
        },
    )
}

/// The field with four elements, `F2[a]/(a²+a+1)`.
pub fn gf4() -> FiniteAlgebra {
    // index = c0 + 2 c1 for c0 + c1 a
    let mul = |x: usize, y: usize| {
        let (a0, a1, b0, b1) = (x & 1, x >> 1, y & 1, y >> 1);
        let c0 = (a0 * b0 + a1 * b1) % 2;
        let c1 = (a0 * b1 + a1 * b0 + a1 * b1) % 2;
        c0 + 2 * c1
    };
    ring_from(vec!["0".into(), "1".into(), "a".into(), "a+1".into()], |x, y| x ^ y, mul)
}

/// `F2[x,y]/(x,y)²`.
pub fn square_zero_plane() -> FiniteAlgebra {
    // index = c0 + 2 cx + 4 cy
    let labels = (0..8)
        .map(|i: usize| {
            let mut t = Vec::new();
            if i & 1 != 0 {
                t.push("1");
            }
            if i & 2 != 0 {
                t.push("x");
            }
            if i & 4 != 0 {
                t.push("y");
            }
            if t.is_empty() {
                "0".to_string()
            } else {
                t.join("+")
            }
        })
        .collect();
    let mul = |a: usize, b: usize| {
        let (a0, b0) = (a & 1, b & 1);
        let lin = |v: usize| v & 6;
        (a0 * b0) | ((if a0 == 1 { lin(b) } else { 0 }) ^ (if b0 == 1 { lin(a) } else { 0 }))
    };
    ring_from(labels, |a, b| a ^ b, mul)
}

pub fn ring_product(factors: &[FiniteAlgebra]) -> FiniteAlgebra {
    let fs: Vec<Arc<FiniteAlgebra>> = factors.iter().cloned().map(Arc::new).collect();
    let kind = factors.first().map_or(AlgebraKind::Ring, |f| f.kind());
    let (p, _) = product(kind, &fs, DEFAULT_SIZE_BOUND).expect("small product");
    (*p).clone()
}

pub fn trivial_monoid() -> FiniteAlgebra {
    monoid_from(vec!["1".into()], |_, _| 0)
}

/// `{1, e}` with `e² = e`.
pub fn idempotent_pair() -> FiniteAlgebra {
    monoid_from(vec!["1".into(), "e".into()], |a, b| a | b)
}

pub fn cyclic_group(n: usize) -> FiniteAlgebra {
    let labels = (0..n).map(|i| if i == 0 { "1".to_string() } else { format!("g^{i}") }).collect();
    monoid_from(labels, |a, b| (a + b) % n)
}

/// `{1, t, …, t^{k-1}, 0}` with `t^k = 0`.
pub fn nil_monoid(k: usize) -> FiniteAlgebra {
    let labels = (0..=k)
        .map(|i| match i {
            0 => "1".to_string(),
            i if i == k => "0".to_string(),
            1 => "t".to_string(),
            i => format!("t^{i}"),
        })
        .collect();
    monoid_from(labels, |a, b| (a + b).min(k))
}

/// `M ∪ {0}` with a new absorbing element.
pub fn adjoin_zero(m: &FiniteAlgebra) -> FiniteAlgebra {
    let n = m.len();
    let mut labels = m.labels().to_vec();
    labels.push("0".into());
    FiniteAlgebra::tabulate(
        AlgebraKind::Monoid,
        labels,
        None,
        &|a, b| if a == n || b == n { n } else { m.mul(a, b) },
        None,
        m.one(),
    )
}

/// The multiplicative monoid of a ring.
pub fn multiplicative(r: &FiniteAlgebra) -> FiniteAlgebra {
    FiniteAlgebra::tabulate(AlgebraKind::Monoid, r.labels().to_vec(), None, &|a, b| r.mul(a, b), None, r.one())
}

/// `{1, x, y, 0}` with every product of non-units zero.
pub fn square_zero_monoid() -> FiniteAlgebra {
    monoid_from(vec!["1".into(), "x".into(), "y".into(), "0".into()], |a, b| match (a, b) {
        (0, b) => b,
        (a, 0) => a,
        _ => 3,
    })
}

/// Named rings with at most 18 elements.
pub fn ring_corpus() -> Vec<(String, FiniteAlgebra)> {
    let f2 = zmod(2);
    let f3 = zmod(3);
    let dual = truncated_poly(2, 2);
    vec![
        ("zero".into(), zmod(1)),
        ("Z/2".into(), zmod(2)),
        ("Z/3".into(), zmod(3)),
        ("Z/4".into(), zmod(4)),
        ("Z/5".into(), zmod(5)),
        ("Z/6".into(), zmod(6)),
        ("Z/8".into(), zmod(8)),
        ("Z/9".into(), zmod(9)),
        ("Z/10".into(), zmod(10)),
        ("Z/12".into(), zmod(12)),
        ("F4".into(), gf4()),
        ("F2xF2".into(), ring_product(&[f2.clone(), f2.clone()])),
        ("F2[x]/(x^2)".into(), dual.clone()),
        ("F2[x]/(x^3)".into(), truncated_poly(2, 3)),
        ("F3[x]/(x^2)".into(), truncated_poly(3, 2)),
        ("F2[x,y]/(x,y)^2".into(), square_zero_plane()),
        ("Z/2xZ/4".into(), ring_product(&[f2.clone(), zmod(4)])),
        ("F2xF2xF2".into(), ring_product(&[f2.clone(), f2.clone(), f2.clone()])),
        ("F2xF4".into(), ring_product(&[f2.clone(), gf4()])),
        ("F2[x]/(x^2)xF3".into(), ring_product(&[dual, f3.clone()])),
        ("Z/2xZ/3xZ/3".into(), ring_product(&[f2, f3.clone(), f3])),
    ]
}

/// Named monoids with at most 12 elements.
pub fn monoid_corpus() -> Vec<(String, FiniteAlgebra)> {
    let b = idempotent_pair();
    vec![
        ("1".into(), trivial_monoid()),
        ("{1,e}".into(), b.clone()),
        ("C2".into(), cyclic_group(2)),
        ("C3".into(), cyclic_group(3)),
        ("C4".into(), cyclic_group(4)),
        ("N2".into(), nil_monoid(2)),
        ("N3".into(), nil_monoid(3)),
        ("C2+0".into(), adjoin_zero(&cyclic_group(2))),
        ("{1,x,y,0}".into(), square_zero_monoid()),
        ("{1,e}^2".into(), ring_product(&[b.clone(), b.clone()])),
        ("{1,e}xC2".into(), ring_product(&[b.clone(), cyclic_group(2)])),
        ("{1,e}^3".into(), ring_product(&[b.clone(), b.clone(), b.clone()])),
        ("(Z/4,*)".into(), multiplicative(&zmod(4))),
        ("(Z/6,*)".into(), multiplicative(&zmod(6))),
        ("(Z/8,*)".into(), multiplicative(&zmod(8))),
        ("(F4,*)".into(), multiplicative(&gf4())),
        ("N2xC2".into(), ring_product(&[nil_monoid(2), cyclic_group(2)])),
        ("(Z/12,*)".into(), multiplicative(&zmod(12))),
    ]
}

pub fn arc(a: FiniteAlgebra) -> Arc<FiniteAlgebra> {
    Arc::new(a)
}
