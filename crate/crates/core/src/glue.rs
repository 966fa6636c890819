//! Gluing spectra along distinguished opens, and recognizing affine spaces.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::algebra::{FiniteAlgebra, Hom};
use crate::context::{descend, Localization, SpectralContext};
use crate::error::{Error, Result};
use crate::spectrum::{ap_maps, build_spec, distinguished_open, members, APMap, Sheaf, SpectralSpace, Topology};

/// Charts `i` and `j` identified along `Pts k_i ≅ Pts k_j` by an isomorphism `K_i → K_j`.
#[derive(Clone, Debug)]
pub struct GlueOverlap {
    pub i: usize,
    pub j: usize,
    pub k_i: Localization,
    pub k_j: Localization,
    pub iso: Hom,
}

#[derive(Clone, Debug)]
pub struct GluingSpec {
    pub context: SpectralContext,
    pub charts: Vec<Arc<FiniteAlgebra>>,
    pub overlaps: Vec<GlueOverlap>,
}

/// The glued space with its charts and the cocone maps `Spec R_i → X`.
#[derive(Clone, Debug)]
pub struct Glued {
    pub space: Arc<SpectralSpace>,
    pub charts: Vec<Arc<SpectralSpace>>,
    pub cocone: Vec<APMap>,
}

impl Glued {
    /// Image of chart `i` in the glued space.
    pub fn chart_image(&self, i: usize) -> u64 {
        self.cocone[i].points().iter().fold(0, |a, &g| a | 1 << g)
    }
}

/// Point map of one identification with the stalk isomorphisms `O_i(x) → O_j(φx)`.
type Identification = Vec<Option<(usize, Hom)>>;

fn identification(
    ctx: SpectralContext,
    xi: &SpectralSpace,
    xj: &SpectralSpace,
    o: &GlueOverlap,
) -> Result<Identification> {
    let (ai, aj) = (xi.affine().expect("chart"), xj.affine().expect("chart"));
    let back =
        o.iso.inverse().ok_or_else(|| Error::Input(format!("overlap ({},{}) is not an isomorphism", o.i, o.j)))?;
    let ui = distinguished_open(xi, &o.k_i);
    let uj = distinguished_open(xj, &o.k_j);
    let mut out: Identification = vec![None; xi.points()];
    let mut hit = 0u64;
    for x in members(ui) {
        let p = form_through(&ai.forms[x], &o.k_i)?;
        let onto = o.k_j.map().then(&back)?.then(&p)?;
        let key = ctx.factorize(&onto, crate::context::CellOrder::Forward)?.localization.key();
        let y = aj
            .forms
            .iter()
            .position(|q| q.key() == key)
            .ok_or_else(|| Error::Input(format!("overlap ({},{}) does not carry points to points", o.i, o.j)))?;
        let q = form_through(&aj.forms[y], &o.k_j)?;
        let sigma = descend(&o.iso.then(&q)?, &p)?;
        if !sigma.is_bijective() {
            return Err(Error::Input(format!("overlap ({},{}) does not identify stalks", o.i, o.j)));
        }
        hit |= 1 << y;
        out[x] = Some((y, sigma.rebase(xi.stalk(x).clone(), xj.stalk(y).clone())?));
    }
    if hit != uj {
        return Err(Error::Input(format!("overlap ({},{}) is not onto Pts k_j", o.i, o.j)));
    }
    Ok(out)
}

/// `K → P` for a local form `p` that factors through `k`.
fn form_through(p: &Localization, k: &Localization) -> Result<Hom> {
    descend(p.map(), k.map())
}

pub fn glue(g: &GluingSpec) -> Result<Glued> {
    let ctx = g.context;
    let n = g.charts.len();
    let charts: Vec<Arc<SpectralSpace>> =
        g.charts.iter().map(|r| build_spec(ctx, r).map(Arc::new)).collect::<Result<_>>()?;
    // ident[i][j]
    let mut ident: Vec<Vec<Option<Identification>>> = vec![vec![None; n]; n];
    for (i, c) in charts.iter().enumerate() {
        ident[i][i] = Some((0..c.points()).map(|x| Some((x, Hom::identity(c.stalk(x))))).collect());
    }
    for o in &g.overlaps {
        if o.i >= n || o.j >= n || o.i == o.j {
            return Err(Error::Input(format!("overlap ({},{}) names bad charts", o.i, o.j)));
        }
        if ident[o.i][o.j].is_some() {
            return Err(Error::Input(format!("overlap ({},{}) given twice", o.i, o.j)));
        }
        if **o.k_i.source() != *g.charts[o.i] || **o.k_j.source() != *g.charts[o.j] {
            return Err(Error::Input(format!("overlap ({},{}) localizes the wrong chart", o.i, o.j)));
        }
        let fwd = identification(ctx, &charts[o.i], &charts[o.j], o)?;
        let mut bwd: Identification = vec![None; charts[o.j].points()];
        for (x, e) in fwd.iter().enumerate() {
            if let Some((y, s)) = e {
                bwd[*y] = Some((x, s.inverse().expect("bijective")));
            }
        }
        ident[o.i][o.j] = Some(fwd);
        ident[o.j][o.i] = Some(bwd);
    }
    let at = |i: usize, j: usize, x: usize| ident[i][j].as_ref().and_then(|m| m[x].as_ref());
    // cocycle: φ_ab(U_ab ∩ U_ac) = U_ba ∩ U_bc and φ_bc φ_ab = φ_ac there
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a == b || b == c || a == c {
                    continue;
                }
                for x in 0..charts[a].points() {
                    let Some((y, s_ab)) = at(a, b, x) else { continue };
                    match (at(a, c, x), at(b, c, *y)) {
                        (None, None) => {}
                        (Some((z, s_ac)), Some((z2, s_bc))) => {
                            if z != z2 || s_ab.then(s_bc)?.map() != s_ac.map() {
                                return Err(Error::CocycleViolation(format!(
                                    "charts {a},{b},{c} disagree at {}",
                                    charts[a].labels()[x]
                                )));
                            }
                        }
                        _ => {
                            return Err(Error::CocycleViolation(format!(
                                "triple overlap of charts {a},{b},{c} is not respected at {}",
                                charts[a].labels()[x]
                            )))
                        }
                    }
                }
            }
        }
    }
    // classes of the disjoint union
    let mut class: Vec<Vec<usize>> = charts.iter().map(|c| vec![usize::MAX; c.points()]).collect();
    let mut reps: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for x in 0..charts[i].points() {
            if class[i][x] != usize::MAX {
                continue;
            }
            let g = reps.len();
            reps.push((i, x));
            for (j, cl) in class.iter_mut().enumerate() {
                if let Some((y, _)) = at(i, j, x) {
                    cl[*y] = g;
                }
            }
        }
    }
    let points = reps.len();
    if points > crate::spectrum::MAX_POINTS {
        return Err(Error::SizeBound { limit: crate::spectrum::MAX_POINTS, attempted: points });
    }
    let image = |i: usize, v: u64| members(v).fold(0u64, |a, x| a | 1 << class[i][x]);
    let gens: Vec<u64> = (0..n)
        .flat_map(|i| charts[i].topology().opens().iter().map(move |&v| (i, v)))
        .map(|(i, v)| image(i, v))
        .collect();
    let top = Arc::new(Topology::generated(points, &gens)?);
    for &w in top.opens() {
        for i in 0..n {
            if !charts[i].topology().is_open(Topology::preimage(&class[i], w)) {
                return Err(Error::InvariantViolation("glued open does not pull back to an open".into()));
            }
        }
    }
    // τ(g, j): O_g → O_j(member)
    let to_chart = |g: usize, j: usize| -> Option<(usize, Hom)> {
        let (i, x) = reps[g];
        at(i, j, x).cloned()
    };
    let stalks: Vec<Arc<FiniteAlgebra>> = reps.iter().map(|&(i, x)| charts[i].stalk(x).clone()).collect();
    let mut spec_maps = std::collections::HashMap::new();
    for x in 0..points {
        let (c, xc) = reps[x];
        for y in members(top.minimal_open(x)) {
            if y == x {
                continue;
            }
            let (yc, t) =
                to_chart(y, c).ok_or_else(|| Error::CocycleViolation("a generization leaves its chart".into()))?;
            let h = charts[c].sheaf().specialization(xc, yc).then(&t.inverse().expect("bijective"))?;
            spec_maps.insert((x, y), h);
        }
    }
    let sheaf = Sheaf::from_stalks(top, ctx.kind(), stalks, &|x, y| spec_maps[&(x, y)].clone())?;
    let labels = (0..points)
        .map(|g| {
            (0..n)
                .filter_map(|j| to_chart(g, j).map(|(y, _)| format!("{j}:{}", charts[j].labels()[y])))
                .collect::<Vec<_>>()
                .join("=")
        })
        .collect();
    let space = Arc::new(SpectralSpace::new(ctx, labels, sheaf)?);
    let cocone = (0..n)
        .map(|i| {
            let pts = class[i].clone();
            let stalk_maps = pts
                .iter()
                .map(|&g| {
                    to_chart(g, i).map(|(_, t)| t).ok_or_else(|| Error::InvariantViolation("lost a chart point".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            APMap::new(charts[i].clone(), space.clone(), pts, stalk_maps)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Glued { space, charts, cocone })
}

#[derive(Clone, Debug)]
pub enum AffineWitness {
    /// The unit `X → Spec Γ X` is an isomorphism.
    Unit(APMap),
    /// Point counts differ.
    PointCounts { space: usize, spectrum: usize },
    /// Same number of points but no isomorphism exists; sorted stalk sizes on each side.
    NoIsomorphism { space: Vec<usize>, spectrum: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct AffineVerdict {
    pub is_affine: bool,
    pub spectrum: Arc<SpectralSpace>,
    pub witness: AffineWitness,
}

/// `X → Spec Γ X`, built from the germ maps `Γ X → O_x`.
pub fn unit_map(x: &Arc<SpectralSpace>, spectrum: &Arc<SpectralSpace>) -> Result<APMap> {
    let ctx = x.context();
    let aff = spectrum.affine().ok_or_else(|| Error::Input("target is not a spectrum".into()))?;
    let full = x.topology().full();
    let mut points = Vec::with_capacity(x.points());
    let mut stalks = Vec::with_capacity(x.points());
    for p in 0..x.points() {
        let germ = x.sheaf().restriction(full, x.topology().minimal_open(p)).clone();
        let germ = germ.rebase(aff.ring.clone(), x.stalk(p).clone())?;
        let key = ctx.factorize(&germ, crate::context::CellOrder::Forward)?.localization.key();
        let y = aff
            .forms
            .iter()
            .position(|q| q.key() == key)
            .ok_or_else(|| Error::InvariantViolation("germ map does not factor through a local form".into()))?;
        points.push(y);
        stalks.push(descend(&germ, aff.forms[y].map())?.rebase(spectrum.stalk(y).clone(), x.stalk(p).clone())?);
    }
    APMap::new(x.clone(), spectrum.clone(), points, stalks)
}

pub fn is_affine(x: &Arc<SpectralSpace>) -> Result<AffineVerdict> {
    let spectrum = Arc::new(build_spec(x.context(), x.global_sections())?);
    let unit = unit_map(x, &spectrum)?;
    if unit.is_iso() {
        return Ok(AffineVerdict { is_affine: true, spectrum, witness: AffineWitness::Unit(unit) });
    }
    if x.points() != spectrum.points() {
        let witness = AffineWitness::PointCounts { space: x.points(), spectrum: spectrum.points() };
        return Ok(AffineVerdict { is_affine: false, spectrum, witness });
    }
    if ap_maps(x, &spectrum)?.iter().any(|m| m.is_iso()) {
        return Err(Error::InvariantViolation("isomorphic to its spectrum by a map other than the unit".into()));
    }
    let sizes = |s: &SpectralSpace| {
        let mut v: Vec<usize> = (0..s.points()).map(|p| s.stalk(p).len()).collect();
        v.sort();
        v
    };
    let witness = AffineWitness::NoIsomorphism { space: sizes(x), spectrum: sizes(&spectrum) };
    Ok(AffineVerdict { is_affine: false, spectrum, witness })
}

/// Affine opens of `x` and, for each, the opens of `x` that are distinguished in it.
pub fn affine_opens(x: &Arc<SpectralSpace>) -> Result<Vec<(u64, BTreeSet<u64>)>> {
    let mut out = Vec::new();
    for &w in x.topology().opens() {
        if w == 0 {
            continue;
        }
        let (sub, index) = x.restrict(w)?;
        let sub = Arc::new(sub);
        let v = is_affine(&sub)?;
        let AffineWitness::Unit(u) = &v.witness else { continue };
        let mut dist = BTreeSet::new();
        for k in x.context().finite_localizations(&v.spectrum.affine().expect("spectrum").ring)? {
            let d = distinguished_open(&v.spectrum, &k);
            let back = Topology::preimage(u.points(), d);
            dist.insert(members(back).fold(0u64, |a, p| a | 1 << index[p]));
        }
        out.push((w, dist));
    }
    Ok(out)
}

/// For every two affine opens sharing a point, some open distinguished in both contains it.
/// Returns the number of (pair, point) checks and the failures.
pub fn affine_communication(x: &Arc<SpectralSpace>) -> Result<(usize, Vec<(u64, u64, usize)>)> {
    let opens = affine_opens(x)?;
    let mut checked = 0;
    let mut failures = Vec::new();
    for (u, du) in &opens {
        for (v, dv) in &opens {
            for p in members(u & v) {
                checked += 1;
                if !du.intersection(dv).any(|d| d >> p & 1 == 1) {
                    failures.push((*u, *v, p));
                }
            }
        }
    }
    Ok((checked, failures))
}

/// Two copies of `Spec R` glued along `Pts k` by the identity.
pub fn two_copies(ctx: SpectralContext, r: &Arc<FiniteAlgebra>, k: &Localization) -> GluingSpec {
    GluingSpec {
        context: ctx,
        charts: vec![r.clone(), r.clone()],
        overlaps: vec![GlueOverlap { i: 0, j: 1, k_i: k.clone(), k_j: k.clone(), iso: Hom::identity(k.target()) }],
    }
}
