//! Spectra as finite spaces with a sheaf of algebras, and the maps between them.

mod apmap;
mod sheaf;
mod topology;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use apmap::{ap_maps, APMap, MapKey};
pub use sheaf::{Presheaf, Sheaf, Sheafification};
pub use topology::{full_mask, members, Topology, MAX_POINTS};

use crate::algebra::{iso_under, limit, Congruence, Diagram, FiniteAlgebra, Hom, Ideal, Limit, DEFAULT_SIZE_BOUND};
use crate::context::{descend, LocalForm, Localization, SpectralContext};
use crate::error::{Error, Result};
use crate::reduction::red;

/// A finite space with a sheaf of algebras whose stalks are local.
#[derive(Clone, Debug)]
pub struct SpectralSpace {
    context: SpectralContext,
    labels: Vec<String>,
    sheaf: Sheaf,
    affine: Option<Affine>,
}

/// What `Spec R` remembers about `R`.
#[derive(Clone, Debug)]
pub struct Affine {
    pub ring: Arc<FiniteAlgebra>,
    /// Point `i` is `forms[i]`.
    pub forms: Vec<LocalForm>,
    /// Every finite localization up to isomorphism, with its distinguished open.
    pub localizations: Vec<(Localization, u64)>,
    /// One representative localization per distinguished open.
    pub basis: Vec<(u64, Localization)>,
    /// `R → O(W)` for every open, in topology order.
    pub structure: Vec<Hom>,
    /// The right Kan extension of `Pts k ↦ red K`, before sheafification.
    pub canonical: Presheaf,
    pub canonical_is_sheaf: bool,
    pub plus_passes: usize,
}

impl SpectralSpace {
    /// A space from a sheaf whose stalks are local and whose specializations are admissible.
    pub fn new(context: SpectralContext, labels: Vec<String>, sheaf: Sheaf) -> Result<Self> {
        if sheaf.kind() != context.kind() {
            return Err(Error::KindMismatch(format!("{} sheaf in the {context} context", sheaf.kind())));
        }
        let t = sheaf.topology().clone();
        if labels.len() != t.points() {
            return Err(Error::Input(format!("{} labels for {} points", labels.len(), t.points())));
        }
        for x in 0..t.points() {
            if !context.is_local(sheaf.stalk(x)) {
                return Err(Error::InvariantViolation(format!("stalk at {} is not local", labels[x])));
            }
        }
        Ok(SpectralSpace { context, labels, sheaf, affine: None })
    }

    /// The space with no points.
    pub fn empty(context: SpectralContext) -> Result<Self> {
        let t = Arc::new(Topology::discrete(0)?);
        let sheaf = Sheaf::from_stalks(t, context.kind(), Vec::new(), &|_, _| unreachable!())?;
        SpectralSpace::new(context, Vec::new(), sheaf)
    }

    pub fn context(&self) -> SpectralContext {
        self.context
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn points(&self) -> usize {
        self.sheaf.topology().points()
    }

    pub fn topology(&self) -> &Arc<Topology> {
        self.sheaf.topology()
    }

    pub fn sheaf(&self) -> &Sheaf {
        &self.sheaf
    }

    pub fn stalk(&self, x: usize) -> &Arc<FiniteAlgebra> {
        self.sheaf.stalk(x)
    }

    pub fn affine(&self) -> Option<&Affine> {
        self.affine.as_ref()
    }

    pub fn global_sections(&self) -> &Arc<FiniteAlgebra> {
        self.sheaf.global_sections()
    }

    /// `ε_R : R → Γ Spec R` for a spectrum.
    pub fn counit(&self) -> Option<&Hom> {
        let a = self.affine.as_ref()?;
        Some(&a.structure[self.topology().index_of(self.topology().full()).unwrap()])
    }

    /// `R → O(W)`.
    pub fn structure_map(&self, w: u64) -> Option<&Hom> {
        let a = self.affine.as_ref()?;
        Some(&a.structure[self.topology().index_of(w)?])
    }

    /// Restriction of the space to an open subset.
    pub fn restrict(&self, w: u64) -> Result<(SpectralSpace, Vec<usize>)> {
        let t = self.topology();
        if !t.is_open(w) {
            return Err(Error::Input("restriction to a non-open subset".into()));
        }
        let pts: Vec<usize> = members(w).collect();
        let pos = |x: usize| pts.iter().position(|&p| p == x).unwrap();
        let opens: Vec<u64> = t
            .opens()
            .iter()
            .filter(|&&v| v & !w == 0)
            .map(|&v| members(v).fold(0u64, |a, x| a | 1 << pos(x)))
            .collect();
        let sub = Arc::new(Topology::from_opens(pts.len(), &opens)?);
        let stalks = pts.iter().map(|&x| self.stalk(x).clone()).collect();
        let sheaf = Sheaf::from_stalks(sub, self.context.kind(), stalks, &|a, b| {
            self.sheaf.specialization(pts[a], pts[b]).clone()
        })?;
        let labels = pts.iter().map(|&x| self.labels[x].clone()).collect();
        Ok((SpectralSpace::new(self.context, labels, sheaf)?, pts))
    }
}

/// Label of a prime by a small generating set, e.g. `(2)` or `(x,y)`; the empty monoid prime is `∅`.
pub fn prime_label(r: &FiniteAlgebra, p: &Ideal) -> String {
    if p.is_empty() {
        return "∅".into();
    }
    // greedily add the element that enlarges the span most
    let mut gens: Vec<usize> = Vec::new();
    let mut span = Ideal::generated(r, &gens);
    while span.len() < p.len() || (span.is_empty() && !p.is_empty()) {
        let best = p
            .members()
            .iter()
            .copied()
            .filter(|&x| !span.contains(x))
            .max_by_key(|&x| (Ideal::generated(r, &[x]).len(), std::cmp::Reverse(x)));
        let Some(x) = best else { break };
        gens.push(x);
        span = Ideal::generated(r, &gens);
    }
    if gens.is_empty() {
        return "(0)".into();
    }
    let names: Vec<&str> = gens.iter().map(|&g| r.label(g)).collect();
    format!("({})", names.join(","))
}

/// `Pts k`: the local forms of `R` that factor through `k`.
pub fn distinguished_open(space: &SpectralSpace, k: &Localization) -> u64 {
    let key = k.key();
    let aff = space.affine.as_ref().expect("distinguished opens live on spectra");
    debug_assert!(**k.source() == *aff.ring, "localization of a different ring");
    aff.forms.iter().enumerate().filter(|(_, p)| key.refines(&p.key())).fold(0, |a, (i, _)| a | 1 << i)
}

/// `Spec R`: local forms as points, topology generated by distinguished opens, and the
/// sheafified right Kan extension of `Pts k ↦ red K` as structure sheaf.
pub fn build_spec(ctx: SpectralContext, r: &Arc<FiniteAlgebra>) -> Result<SpectralSpace> {
    ctx.check_algebra(r)?;
    let forms = ctx.local_forms(r)?;
    let n = forms.len();
    if n > MAX_POINTS {
        return Err(Error::SizeBound { limit: MAX_POINTS, attempted: n });
    }
    let form_keys: Vec<Congruence> = forms.iter().map(|p| p.key()).collect();
    let pts = |key: &Congruence| {
        form_keys.iter().enumerate().filter(|(_, pk)| key.refines(pk)).fold(0u64, |a, (i, _)| a | 1 << i)
    };

    let localizations: Vec<(Localization, u64)> = ctx
        .finite_localizations(r)?
        .into_iter()
        .map(|k| {
            let m = pts(&k.key());
            (k, m)
        })
        .collect();
    let mut by_open: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, (_, m)) in localizations.iter().enumerate() {
        by_open.entry(*m).or_default().push(i);
    }
    let basis: Vec<(u64, Localization)> =
        by_open.iter().map(|(&m, ids)| (m, localizations[ids[0]].0.clone())).collect();
    let masks: Vec<u64> = basis.iter().map(|(m, _)| *m).collect();
    let topology = Arc::new(Topology::generated(n, &masks)?);

    // R_U: the localization with the largest kernel among those with the same points.
    let mut can_maps: BTreeMap<u64, Hom> = BTreeMap::new();
    for (&m, ids) in &by_open {
        let join =
            ids.iter().skip(1).fold(localizations[ids[0]].0.key(), |acc, &i| acc.join(&localizations[i].0.key(), r));
        let ru = ids.iter().map(|&i| &localizations[i].0).find(|k| k.key() == join).ok_or_else(|| {
            Error::InvariantViolation("localizations with the same points have no common refinement".into())
        })?;
        let unit = red(ctx, ru.target())?;
        can_maps.insert(m, ru.map().then(&unit)?);
    }

    // Right Kan extension to every open.
    let opens = topology.opens().to_vec();
    let mut rke: Vec<Option<(Vec<u64>, Limit)>> = Vec::with_capacity(opens.len());
    for &w in &opens {
        if can_maps.contains_key(&w) {
            rke.push(None);
            continue;
        }
        let inside: Vec<u64> = masks.iter().copied().filter(|&u| u & !w == 0).collect();
        let mut d = Diagram::new(ctx.kind());
        for &u in &inside {
            d.object(can_maps[&u].target().clone());
        }
        for (i, &u) in inside.iter().enumerate() {
            for (j, &v) in inside.iter().enumerate() {
                if i != j && v & !u == 0 {
                    d.arrow(i, j, descend(&can_maps[&v], &can_maps[&u])?);
                }
            }
        }
        rke.push(Some((inside, limit(&d, DEFAULT_SIZE_BOUND)?)));
    }
    let sections: Vec<Arc<FiniteAlgebra>> = opens
        .iter()
        .zip(&rke)
        .map(|(w, e)| match e {
            None => can_maps[w].target().clone(),
            Some((_, lim)) => lim.apex.clone(),
        })
        .collect();
    let structure_can: Vec<Hom> = opens
        .iter()
        .zip(&rke)
        .map(|(w, e)| match e {
            None => Ok(can_maps[w].clone()),
            Some((inside, lim)) => lim.lift(r, &inside.iter().map(|u| can_maps[u].clone()).collect::<Vec<_>>()),
        })
        .collect::<Result<_>>()?;
    // O(W) → O^can(U) for a basis open U ⊆ W
    let to_basis = |i: usize, u: u64| -> Result<Hom> {
        match &rke[i] {
            None => descend(&can_maps[&u], &structure_can[i]),
            Some((inside, lim)) => Ok(lim.projections[inside.iter().position(|&v| v == u).unwrap()].clone()),
        }
    };
    let canonical = Presheaf::new(topology.clone(), ctx.kind(), sections.clone(), |i, j| match &rke[j] {
        None => to_basis(i, opens[j]),
        Some((inside, lim)) => {
            let legs = inside.iter().map(|&u| to_basis(i, u)).collect::<Result<Vec<_>>>()?;
            lim.lift(&sections[i], &legs)
        }
    })?;

    let canonical_is_sheaf = canonical.is_sheaf()?;
    let sh = canonical.sheafify()?;
    let eps: Vec<Hom> = structure_can.iter().zip(&sh.unit).map(|(a, b)| a.then(b)).collect::<Result<_>>()?;
    let idx = |w: u64| topology.index_of(w).unwrap();

    // Stalks of the sheafification are the local forms, uniquely under R.
    let mut to_form = Vec::with_capacity(n);
    for (x, p) in forms.iter().enumerate() {
        let e = &eps[idx(topology.minimal_open(x))];
        let iso = iso_under(e, p.map())
            .ok_or_else(|| Error::InvariantViolation(format!("stalk at point {x} is not its local form")))?;
        to_form.push(iso);
    }
    let stalks: Vec<Arc<FiniteAlgebra>> = forms.iter().map(|p| p.target().clone()).collect();
    let sheaf = Sheaf::from_stalks(topology.clone(), ctx.kind(), stalks, &|x, y| {
        descend(forms[y].map(), forms[x].map()).expect("specialization under R")
    })?;
    for (i, &w) in opens.iter().enumerate() {
        let legs: Vec<Hom> = members(w)
            .map(|y| sh.sheaf.restriction(w, topology.minimal_open(y)).then(&to_form[y]))
            .collect::<Result<_>>()?;
        let glue = |s: usize| sheaf.glue(w, &legs.iter().map(|h| h.apply(s)).collect::<Vec<_>>());
        let image: Option<Vec<usize>> = (0..sh.sheaf.section_at(i).len()).map(glue).collect();
        let ok = image.is_some_and(|im| {
            let mut seen = im.clone();
            seen.sort();
            seen.dedup();
            seen.len() == im.len() && im.len() == sheaf.section(w).len()
        });
        if !ok {
            return Err(Error::InvariantViolation("sheafification disagrees with the stalk description".into()));
        }
    }
    let structure: Vec<Hom> = opens
        .iter()
        .map(|&w| {
            let map = (0..r.len())
                .map(|a| {
                    let germs: Vec<usize> = members(w).map(|y| forms[y].map().apply(a)).collect();
                    sheaf.glue(w, &germs).ok_or_else(|| Error::InvariantViolation("R does not map to sections".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            Hom::new(r.clone(), sheaf.section(w).clone(), map)
        })
        .collect::<Result<_>>()?;

    let labels = forms.iter().map(|p| prime_label(r, &ctx.prime_of(p))).collect();
    let mut space = SpectralSpace::new(ctx, labels, sheaf)?;
    space.affine = Some(Affine {
        ring: r.clone(),
        forms,
        localizations,
        basis,
        structure,
        canonical,
        canonical_is_sheaf,
        plus_passes: sh.passes,
    });
    Ok(space)
}

/// `Spec f : Spec S → Spec R` for `f : R → S`; `x` is `Spec S` and `y` is `Spec R`.
/// A point `q` goes to the localization part of `q ∘ f`, and the stalk map is the admissible part.
pub fn spec_map(x: &Arc<SpectralSpace>, y: &Arc<SpectralSpace>, f: &Hom) -> Result<APMap> {
    let ctx = x.context;
    let (ax, ay) = match (&x.affine, &y.affine) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Input("spec_map needs two spectra".into())),
    };
    if **f.source() != *ay.ring || **f.target() != *ax.ring {
        return Err(Error::Input("map does not match the spectra".into()));
    }
    let mut points = Vec::with_capacity(ax.forms.len());
    let mut stalks = Vec::with_capacity(ax.forms.len());
    for q in &ax.forms {
        let qf = f.then(q.map())?;
        let fz = ctx.factorize(&qf, crate::context::CellOrder::Forward)?;
        let key = fz.localization.key();
        let p = ay
            .forms
            .iter()
            .position(|p| p.key() == key)
            .ok_or_else(|| Error::InvariantViolation("localization part of a point is not a local form".into()))?;
        points.push(p);
        let g = descend(&qf, ay.forms[p].map())?;
        stalks.push(g.rebase(y.stalk(p).clone(), x.stalk(points.len() - 1).clone())?);
    }
    APMap::new(x.clone(), y.clone(), points, stalks)
}

/// Whether `Spec k` is an open embedding onto `Pts k` with matching sections.
pub fn open_embedding_check(space: &Arc<SpectralSpace>, k: &Localization) -> Result<bool> {
    let ctx = space.context;
    let sk = Arc::new(build_spec(ctx, k.target())?);
    let m = spec_map(&sk, space, k.map())?;
    let image = m.points().iter().fold(0u64, |a, &p| a | 1 << p);
    let mut sorted = m.points().to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != m.points().len() || image != distinguished_open(space, k) {
        return Ok(false);
    }
    let t = space.topology();
    for &v in sk.topology().opens() {
        let img = members(v).fold(0u64, |a, q| a | 1 << m.points()[q]);
        if !t.is_open(img) {
            return Ok(false);
        }
    }
    for &w in t.opens().iter().filter(|&&w| w & !image == 0) {
        if !m.sheaf_component(w)?.is_bijective() {
            return Ok(false);
        }
    }
    Ok(true)
}
