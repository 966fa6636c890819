use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::topology::{members, Topology};
use crate::algebra::{limit, AlgebraKind, Diagram, FiniteAlgebra, Hom, Limit, DEFAULT_SIZE_BOUND};
use crate::error::{Error, Result};

/// Sections on every open of a finite space, with restriction maps for every inclusion.
#[derive(Clone, Debug)]
pub struct Presheaf {
    topology: Arc<Topology>,
    kind: AlgebraKind,
    sections: Vec<Arc<FiniteAlgebra>>,
    restrictions: HashMap<(usize, usize), Hom>,
}

/// Output of [`Presheaf::sheafify`]: the sheaf, the unit `F(W) → F⁺(W)` per open and the number
/// of plus passes used (one for a separated presheaf, two otherwise).
#[derive(Clone, Debug)]
pub struct Sheafification {
    pub sheaf: Presheaf,
    pub unit: Vec<Hom>,
    pub passes: usize,
}

impl Presheaf {
    /// `restriction(from, to)` is called for every pair of open indices with `to ⊆ from`.
    pub fn new(
        topology: Arc<Topology>,
        kind: AlgebraKind,
        sections: Vec<Arc<FiniteAlgebra>>,
        mut restriction: impl FnMut(usize, usize) -> Result<Hom>,
    ) -> Result<Self> {
        if sections.len() != topology.len() {
            return Err(Error::Input(format!("{} sections for {} opens", sections.len(), topology.len())));
        }
        if let Some(bad) = sections.iter().find(|s| s.kind() != kind) {
            return Err(Error::KindMismatch(format!("{} section in a {kind} presheaf", bad.kind())));
        }
        let opens = topology.opens().to_vec();
        let mut restrictions = HashMap::new();
        for (i, &u) in opens.iter().enumerate() {
            for (j, &v) in opens.iter().enumerate() {
                if v & !u == 0 {
                    let h = restriction(i, j)?;
                    if h.source().len() != sections[i].len() || h.target().len() != sections[j].len() {
                        return Err(Error::Input("restriction has the wrong endpoints".into()));
                    }
                    restrictions.insert((i, j), h);
                }
            }
        }
        Ok(Presheaf { topology, kind, sections, restrictions })
    }

    /// Checks identities and composition of restrictions.
    pub fn validate(&self) -> Result<()> {
        for (&(i, j), h) in &self.restrictions {
            if !h.is_hom() {
                return Err(Error::InvariantViolation("restriction is not a homomorphism".into()));
            }
            if i == j && (0..h.source().len()).any(|x| h.apply(x) != x) {
                return Err(Error::InvariantViolation("restriction to the same open is not the identity".into()));
            }
            for (&(j2, k), g) in &self.restrictions {
                if j2 == j && h.then(g)?.map() != self.restrictions[&(i, k)].map() {
                    return Err(Error::InvariantViolation("restrictions do not compose".into()));
                }
            }
        }
        Ok(())
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn section_at(&self, i: usize) -> &Arc<FiniteAlgebra> {
        &self.sections[i]
    }

    pub fn section(&self, w: u64) -> &Arc<FiniteAlgebra> {
        &self.sections[self.topology.index_of(w).expect("not an open")]
    }

    pub fn sections(&self) -> &[Arc<FiniteAlgebra>] {
        &self.sections
    }

    pub fn restriction_at(&self, i: usize, j: usize) -> &Hom {
        &self.restrictions[&(i, j)]
    }

    pub fn restriction(&self, w: u64, v: u64) -> &Hom {
        let t = &self.topology;
        self.restriction_at(t.index_of(w).expect("not an open"), t.index_of(v).expect("not an open"))
    }

    /// Sections at `U_x`.
    pub fn stalk(&self, x: usize) -> &Arc<FiniteAlgebra> {
        self.section(self.topology.minimal_open(x))
    }

    /// `F(U_x) → F(U_y)` for `y ∈ U_x`.
    pub fn specialization(&self, x: usize, y: usize) -> &Hom {
        self.restriction(self.topology.minimal_open(x), self.topology.minimal_open(y))
    }

    /// `F(W) → Π_{x∈W} F(U_x)` is injective for every open `W`.
    pub fn is_separated(&self) -> bool {
        self.topology.opens().iter().all(|&w| {
            let legs: Vec<&Hom> = members(w).map(|x| self.restriction(w, self.topology.minimal_open(x))).collect();
            let mut seen = BTreeSet::new();
            (0..self.section(w).len()).all(|s| seen.insert(legs.iter().map(|h| h.apply(s)).collect::<Vec<_>>()))
        })
    }

    /// Every open satisfies the equalizer condition for its cover by minimal opens,
    /// which on a finite space implies it for every cover.
    pub fn is_sheaf(&self) -> Result<bool> {
        let (_, unit) = self.plus()?;
        Ok(unit.iter().all(|h| h.is_bijective()))
    }

    /// Equalizer condition for one cover of `w`.
    pub fn satisfies_cover(&self, w: u64, cover: &[u64]) -> Result<bool> {
        let mut d = Diagram::new(self.kind);
        let mut objs: Vec<u64> = cover.to_vec();
        for &a in cover {
            for &b in cover {
                if !objs.contains(&(a & b)) {
                    objs.push(a & b);
                }
            }
        }
        for &o in &objs {
            d.object(self.section(o).clone());
        }
        for (i, &a) in cover.iter().enumerate() {
            for (j, &o) in objs.iter().enumerate() {
                if i != j && o & !a == 0 {
                    d.arrow(i, j, self.restriction(a, o).clone());
                }
            }
        }
        let lim = limit(&d, DEFAULT_SIZE_BOUND)?;
        let legs: Vec<Hom> = objs.iter().map(|&o| self.restriction(w, o).clone()).collect();
        Ok(lim.lift(self.section(w), &legs)?.is_bijective())
    }

    /// Čech sections over the cover of each open by minimal opens, with the canonical map.
    /// On a finite space this cover refines every other one, so it computes the plus construction.
    pub fn plus(&self) -> Result<(Presheaf, Vec<Hom>)> {
        let t = self.topology.clone();
        let mut limits: Vec<(Vec<u64>, Limit)> = Vec::with_capacity(t.len());
        for &w in t.opens() {
            let mins: BTreeSet<u64> = members(w).map(|x| t.minimal_open(x)).collect();
            let mut objs: BTreeSet<u64> = mins.clone();
            for &a in &mins {
                for &b in &mins {
                    objs.insert(a & b);
                }
            }
            let objs: Vec<u64> = objs.into_iter().rev().collect();
            let mut d = Diagram::new(self.kind);
            for &o in &objs {
                d.object(self.section(o).clone());
            }
            for (i, &a) in objs.iter().enumerate() {
                if !mins.contains(&a) {
                    continue;
                }
                for (j, &o) in objs.iter().enumerate() {
                    if i != j && o & !a == 0 {
                        d.arrow(i, j, self.restriction(a, o).clone());
                    }
                }
            }
            limits.push((objs, limit(&d, DEFAULT_SIZE_BOUND)?));
        }
        let sections: Vec<Arc<FiniteAlgebra>> = limits.iter().map(|(_, l)| l.apex.clone()).collect();
        let unit = t
            .opens()
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let (objs, lim) = &limits[i];
                let legs: Vec<Hom> = objs.iter().map(|&o| self.restriction(w, o).clone()).collect();
                lim.lift(self.section(w), &legs)
            })
            .collect::<Result<Vec<_>>>()?;
        let plus = Presheaf::new(t.clone(), self.kind, sections, |i, j| {
            let (src_objs, src) = &limits[i];
            let (dst_objs, dst) = &limits[j];
            let legs: Vec<Hom> = dst_objs
                .iter()
                .map(|o| src.projections[src_objs.iter().position(|p| p == o).unwrap()].clone())
                .collect();
            dst.lift(&src.apex, &legs)
        })?;
        Ok((plus, unit))
    }

    /// Plus construction once for a separated presheaf, twice otherwise.
    pub fn sheafify(&self) -> Result<Sheafification> {
        let (first, unit1) = self.plus()?;
        if self.is_separated() {
            return Ok(Sheafification { sheaf: first, unit: unit1, passes: 1 });
        }
        let (second, unit2) = first.plus()?;
        let unit = unit1.iter().zip(&unit2).map(|(a, b)| a.then(b)).collect::<Result<Vec<_>>>()?;
        Ok(Sheafification { sheaf: second, unit, passes: 2 })
    }
}

/// A sheaf on a T0 finite space, stored as its presheaf of sections together with germ tables
/// so a compatible family of germs can be glued back to a section.
#[derive(Clone, Debug)]
pub struct Sheaf {
    presheaf: Presheaf,
    glue: Vec<HashMap<Vec<u32>, u32>>,
}

impl Sheaf {
    /// Wraps a presheaf after checking the sheaf condition.
    pub fn from_presheaf(p: Presheaf) -> Result<Self> {
        if !p.topology.is_t0() {
            return Err(Error::Input("sheaves are only stored on T0 spaces".into()));
        }
        if !p.is_sheaf()? {
            return Err(Error::InvariantViolation("presheaf fails the sheaf condition".into()));
        }
        Ok(Self::index(p))
    }

    /// The sheaf with the given stalks and specialization maps `stalk(x) → stalk(y)` for `y ∈ U_x`.
    /// Sections over `U_x` are the stalk at `x` itself; other sections are compatible germ families.
    pub fn from_stalks(
        topology: Arc<Topology>,
        kind: AlgebraKind,
        stalks: Vec<Arc<FiniteAlgebra>>,
        specialization: &dyn Fn(usize, usize) -> Hom,
    ) -> Result<Self> {
        let t = topology.clone();
        if !t.is_t0() {
            return Err(Error::Input("sheaves are only stored on T0 spaces".into()));
        }
        if stalks.len() != t.points() {
            return Err(Error::Input(format!("{} stalks for {} points", stalks.len(), t.points())));
        }
        let n = t.points();
        let mut spec: HashMap<(usize, usize), Hom> = HashMap::new();
        for x in 0..n {
            for y in members(t.minimal_open(x)) {
                let h = if x == y { Hom::identity(&stalks[x]) } else { specialization(x, y) };
                if h.source().len() != stalks[x].len() || h.target().len() != stalks[y].len() {
                    return Err(Error::Input(format!("specialization {x} → {y} has the wrong endpoints")));
                }
                spec.insert((x, y), h);
            }
        }
        for x in 0..n {
            for y in members(t.minimal_open(x)) {
                for z in members(t.minimal_open(y)) {
                    if spec[&(x, y)].then(&spec[&(y, z)])?.map() != spec[&(x, z)].map() {
                        return Err(Error::InvariantViolation(format!(
                            "specializations {x} → {y} → {z} do not compose"
                        )));
                    }
                }
            }
        }
        let point_of: HashMap<u64, usize> = (0..n).map(|x| (t.minimal_open(x), x)).collect();
        let mut limits: Vec<Option<Limit>> = Vec::with_capacity(t.len());
        let mut sections = Vec::with_capacity(t.len());
        for &w in t.opens() {
            if let Some(&x) = point_of.get(&w) {
                limits.push(None);
                sections.push(stalks[x].clone());
                continue;
            }
            let pts: Vec<usize> = members(w).collect();
            let mut d = Diagram::new(kind);
            for &x in &pts {
                d.object(stalks[x].clone());
            }
            for (i, &x) in pts.iter().enumerate() {
                for (j, &y) in pts.iter().enumerate() {
                    if i != j && t.generizes(y, x) {
                        d.arrow(i, j, spec[&(x, y)].clone());
                    }
                }
            }
            let lim = limit(&d, DEFAULT_SIZE_BOUND)?;
            sections.push(lim.apex.clone());
            limits.push(Some(lim));
        }
        // section(W) → stalk(y) for y ∈ W
        let to_point = |i: usize, y: usize| -> Hom {
            let w = t.opens()[i];
            match &limits[i] {
                None => spec[&(point_of[&w], y)].clone(),
                Some(lim) => lim.projections[members(w).position(|p| p == y).unwrap()].clone(),
            }
        };
        let presheaf = Presheaf::new(topology.clone(), kind, sections.clone(), |i, j| {
            let v = t.opens()[j];
            match &limits[j] {
                None => Ok(to_point(i, point_of[&v])),
                Some(lim) => {
                    let legs: Vec<Hom> = members(v).map(|y| to_point(i, y)).collect();
                    lim.lift(&sections[i], &legs)
                }
            }
        })?;
        Ok(Self::index(presheaf))
    }

    fn index(presheaf: Presheaf) -> Self {
        let t = presheaf.topology.clone();
        let glue = t
            .opens()
            .iter()
            .map(|&w| {
                let legs: Vec<&Hom> = members(w).map(|x| presheaf.restriction(w, t.minimal_open(x))).collect();
                (0..presheaf.section(w).len())
                    .map(|s| (legs.iter().map(|h| h.apply(s) as u32).collect(), s as u32))
                    .collect()
            })
            .collect();
        Sheaf { presheaf, glue }
    }

    pub fn presheaf(&self) -> &Presheaf {
        &self.presheaf
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.presheaf.topology
    }

    pub fn kind(&self) -> AlgebraKind {
        self.presheaf.kind
    }

    pub fn section(&self, w: u64) -> &Arc<FiniteAlgebra> {
        self.presheaf.section(w)
    }

    pub fn restriction(&self, w: u64, v: u64) -> &Hom {
        self.presheaf.restriction(w, v)
    }

    pub fn stalk(&self, x: usize) -> &Arc<FiniteAlgebra> {
        self.presheaf.stalk(x)
    }

    pub fn specialization(&self, x: usize, y: usize) -> &Hom {
        self.presheaf.specialization(x, y)
    }

    pub fn global_sections(&self) -> &Arc<FiniteAlgebra> {
        self.section(self.topology().full())
    }

    /// Germs of a section over `w`, one per point of `w` in increasing order.
    pub fn germs(&self, w: u64, s: usize) -> Vec<usize> {
        let t = self.topology();
        members(w).map(|x| self.restriction(w, t.minimal_open(x)).apply(s)).collect()
    }

    /// The section over `w` with the given germs, if they are compatible.
    pub fn glue(&self, w: u64, germs: &[usize]) -> Option<usize> {
        let i = self.topology().index_of(w)?;
        let key: Vec<u32> = germs.iter().map(|&g| g as u32).collect();
        self.glue[i].get(&key).map(|&s| s as usize)
    }
}
