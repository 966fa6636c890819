use std::collections::HashMap;
use std::sync::Arc;

use super::topology::{members, Topology};
use super::SpectralSpace;
use crate::algebra::{homs, Hom};
use crate::error::{Error, Result};

const MAX_MAPS: usize = 1 << 16;

pub type MapKey = (Vec<usize>, Vec<Vec<usize>>);

/// A map of spaces `X → Y`: a continuous point map and, for each `x`, an admissible stalk map
/// `O_Y(φx) → O_X(x)` natural in specializations.
#[derive(Clone, Debug)]
pub struct APMap {
    source: Arc<SpectralSpace>,
    target: Arc<SpectralSpace>,
    points: Vec<usize>,
    stalks: Vec<Hom>,
}

impl APMap {
    pub fn new(
        source: Arc<SpectralSpace>,
        target: Arc<SpectralSpace>,
        points: Vec<usize>,
        stalks: Vec<Hom>,
    ) -> Result<Self> {
        let ctx = source.context();
        if target.context() != ctx {
            return Err(Error::KindMismatch("spaces live in different contexts".into()));
        }
        if points.len() != source.points() || stalks.len() != source.points() {
            return Err(Error::Input("point map has the wrong length".into()));
        }
        if points.iter().any(|&p| p >= target.points()) {
            return Err(Error::Input("point map leaves the target".into()));
        }
        if !source.topology().is_continuous(target.topology(), &points) {
            return Err(Error::InvariantViolation("point map is not continuous".into()));
        }
        let stalks = stalks
            .into_iter()
            .enumerate()
            .map(|(x, h)| h.rebase(target.stalk(points[x]).clone(), source.stalk(x).clone()))
            .collect::<Result<Vec<_>>>()?;
        for (x, h) in stalks.iter().enumerate() {
            if !ctx.is_admissible(h) {
                return Err(Error::InvariantViolation(format!(
                    "stalk map at {} is not admissible",
                    source.labels()[x]
                )));
            }
        }
        let m = APMap { source, target, points, stalks };
        for x in 0..m.points.len() {
            for y in members(m.source.topology().minimal_open(x)) {
                if !m.natural_at(x, y)? {
                    return Err(Error::InvariantViolation("stalk maps are not natural".into()));
                }
            }
        }
        Ok(m)
    }

    fn natural_at(&self, x: usize, y: usize) -> Result<bool> {
        let (sx, sy) = (self.source.sheaf(), self.target.sheaf());
        let left = self.stalks[x].then(sx.specialization(x, y))?;
        let right = sy.specialization(self.points[x], self.points[y]).then(&self.stalks[y])?;
        Ok(left.map() == right.map())
    }

    pub fn identity(x: &Arc<SpectralSpace>) -> Self {
        APMap {
            source: x.clone(),
            target: x.clone(),
            points: (0..x.points()).collect(),
            stalks: (0..x.points()).map(|p| Hom::identity(x.stalk(p))).collect(),
        }
    }

    pub fn source(&self) -> &Arc<SpectralSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SpectralSpace> {
        &self.target
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    /// `O_Y(φx) → O_X(x)`.
    pub fn stalk_map(&self, x: usize) -> &Hom {
        &self.stalks[x]
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &APMap) -> Result<APMap> {
        if !Arc::ptr_eq(&self.target, &next.source) && self.target.points() != next.source.points() {
            return Err(Error::Input("maps do not compose".into()));
        }
        let points = self.points.iter().map(|&y| next.points[y]).collect();
        let stalks = (0..self.points.len())
            .map(|x| next.stalks[self.points[x]].then(&self.stalks[x]))
            .collect::<Result<Vec<_>>>()?;
        APMap::new(self.source.clone(), next.target.clone(), points, stalks)
    }

    /// `next ∘ self` without re-checking; both maps are already valid.
    pub(crate) fn then_unchecked(&self, next: &APMap) -> APMap {
        let points = self.points.iter().map(|&y| next.points[y]).collect();
        let stalks = (0..self.points.len())
            .map(|x| next.stalks[self.points[x]].then(&self.stalks[x]).expect("composable stalk maps"))
            .collect();
        APMap { source: self.source.clone(), target: next.target.clone(), points, stalks }
    }

    /// Point map and stalk maps, enough to tell two maps between the same spaces apart.
    pub fn key(&self) -> MapKey {
        (self.points.clone(), self.stalks.iter().map(|h| h.map()).collect())
    }

    pub fn is_iso(&self) -> bool {
        let n = self.points.len();
        if n != self.target.points() {
            return false;
        }
        let mut hit = vec![false; n];
        for &p in &self.points {
            if hit[p] {
                return false;
            }
            hit[p] = true;
        }
        let image = |v: u64| members(v).fold(0u64, |a, x| a | 1 << self.points[x]);
        let open_onto = self.source.topology().opens().iter().all(|&v| self.target.topology().is_open(image(v)));
        open_onto && self.stalks.iter().all(|h| h.is_bijective())
    }

    /// `O_Y(W) → O_X(φ⁻¹W)`, computed on germs.
    pub fn sheaf_component(&self, w: u64) -> Result<Hom> {
        let pre = Topology::preimage(&self.points, w);
        let (sx, sy) = (self.source.sheaf(), self.target.sheaf());
        let ys: Vec<usize> = members(w).collect();
        let map = (0..sy.section(w).len())
            .map(|s| {
                let germs = sy.germs(w, s);
                let pulled: Vec<usize> = members(pre)
                    .map(|x| self.stalks[x].apply(germs[ys.iter().position(|&y| y == self.points[x]).unwrap()]))
                    .collect();
                sx.glue(pre, &pulled).ok_or_else(|| Error::InvariantViolation("pulled-back germs do not glue".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Hom::new(sy.section(w).clone(), sx.section(pre).clone(), map)
    }

    pub fn same_as(&self, other: &APMap) -> bool {
        self.points == other.points && self.stalks.iter().zip(&other.stalks).all(|(a, b)| a.map() == b.map())
    }
}

/// Every map `X → Y`, by backtracking over monotone point maps and then natural admissible stalk maps.
pub fn ap_maps(x: &Arc<SpectralSpace>, y: &Arc<SpectralSpace>) -> Result<Vec<APMap>> {
    let ctx = x.context();
    if y.context() != ctx {
        return Err(Error::KindMismatch("spaces live in different contexts".into()));
    }
    let (tx, ty) = (x.topology(), y.topology());
    let n = x.points();
    let mut point_maps: Vec<Vec<usize>> = Vec::new();
    let mut cur = vec![0usize; n];
    fn points_rec(i: usize, n: usize, tx: &Topology, ty: &Topology, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        'v: for v in 0..ty.points() {
            cur[i] = v;
            for j in 0..i {
                if tx.generizes(j, i) && !ty.generizes(cur[j], v) {
                    continue 'v;
                }
                if tx.generizes(i, j) && !ty.generizes(v, cur[j]) {
                    continue 'v;
                }
            }
            points_rec(i + 1, n, tx, ty, cur, out);
        }
    }
    points_rec(0, n, tx, ty, &mut cur, &mut point_maps);

    let mut cache: HashMap<(usize, usize), Vec<Hom>> = HashMap::new();
    let mut out = Vec::new();
    for pm in point_maps {
        if !tx.is_continuous(ty, &pm) {
            continue;
        }
        let cands: Vec<Vec<Hom>> = (0..n)
            .map(|i| {
                cache
                    .entry((pm[i], i))
                    .or_insert_with(|| {
                        homs(y.stalk(pm[i]), x.stalk(i)).into_iter().filter(|h| ctx.is_admissible(h)).collect()
                    })
                    .clone()
            })
            .collect();
        let mut chosen: Vec<usize> = vec![0; n];
        fn stalks_rec(
            i: usize,
            x: &SpectralSpace,
            y: &SpectralSpace,
            pm: &[usize],
            cands: &[Vec<Hom>],
            chosen: &mut Vec<usize>,
            found: &mut Vec<Vec<Hom>>,
        ) -> Result<()> {
            let n = pm.len();
            if i == n {
                found.push((0..n).map(|k| cands[k][chosen[k]].clone()).collect());
                if found.len() > MAX_MAPS {
                    return Err(Error::SizeBound { limit: MAX_MAPS, attempted: found.len() });
                }
                return Ok(());
            }
            let (tx, sx, sy) = (x.topology(), x.sheaf(), y.sheaf());
            'c: for c in 0..cands[i].len() {
                chosen[i] = c;
                for j in 0..=i {
                    for (a, b) in [(i, j), (j, i)] {
                        if tx.generizes(b, a) {
                            let left = cands[a][chosen[a]].then(sx.specialization(a, b))?;
                            let right = sy.specialization(pm[a], pm[b]).then(&cands[b][chosen[b]])?;
                            if left.map() != right.map() {
                                continue 'c;
                            }
                        }
                    }
                }
                stalks_rec(i + 1, x, y, pm, cands, chosen, found)?;
            }
            Ok(())
        }
        let mut found = Vec::new();
        stalks_rec(0, x, y, &pm, &cands, &mut chosen, &mut found)?;
        for stalks in found {
            out.push(APMap::new(x.clone(), y.clone(), pm.clone(), stalks)?);
        }
    }
    Ok(out)
}
