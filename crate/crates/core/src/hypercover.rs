//! Covers by localizations, their Čech hypercovers and `H⁰`.

use std::sync::Arc;

use crate::algebra::same;
use crate::algebra::{limit, pushout, Diagram, FiniteAlgebra, Hom, Limit, Pushout, DEFAULT_SIZE_BOUND};
use crate::context::{Localization, SpectralContext};
use crate::error::{Error, Result};

/// A family of localizations `R → K_i` through which every local form of `R` factors.
#[derive(Clone, Debug)]
pub struct Opcover {
    base: Arc<FiniteAlgebra>,
    components: Vec<Localization>,
}

impl Opcover {
    /// Checks that the family covers.
    pub fn new(ctx: SpectralContext, base: &Arc<FiniteAlgebra>, components: Vec<Localization>) -> Result<Self> {
        let c = Opcover::unchecked(base, components)?;
        if !is_opcover(ctx, &c)? {
            return Err(Error::Input("family does not cover".into()));
        }
        Ok(c)
    }

    pub fn unchecked(base: &Arc<FiniteAlgebra>, components: Vec<Localization>) -> Result<Self> {
        for k in &components {
            if !same(k.source(), base) {
                return Err(Error::Input("component is not a localization of the base".into()));
            }
        }
        Ok(Opcover { base: base.clone(), components })
    }

    /// The cover by all local forms.
    pub fn finest(ctx: SpectralContext, base: &Arc<FiniteAlgebra>) -> Result<Self> {
        Ok(Opcover { base: base.clone(), components: ctx.local_forms(base)? })
    }

    /// The one-component cover by the identity.
    pub fn trivial(base: &Arc<FiniteAlgebra>) -> Self {
        Opcover { base: base.clone(), components: vec![Localization::identity(base)] }
    }

    pub fn base(&self) -> &Arc<FiniteAlgebra> {
        &self.base
    }

    pub fn components(&self) -> &[Localization] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Every component factors through some component of `coarse`.
    pub fn refines(&self, coarse: &Opcover) -> bool {
        self.components.iter().all(|l| coarse.components.iter().any(|k| k.key().refines(&l.key())))
    }

    /// `{f_* K_i}` over `S` for `f : R → S`, with the induced maps `K_i → f_* K_i`.
    pub fn push_forward(&self, ctx: SpectralContext, f: &Hom) -> Result<(Opcover, Vec<Hom>)> {
        let (components, across): (Vec<_>, Vec<_>) =
            self.components.iter().map(|k| k.push_forward(ctx, f)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
        Ok((Opcover { base: f.target().clone(), components }, across))
    }

    /// `{L_ij ∘ K_i}` from a cover of each component.
    pub fn compose(&self, refinements: &[Opcover]) -> Result<Opcover> {
        if refinements.len() != self.components.len() {
            return Err(Error::Input("need one cover per component".into()));
        }
        let mut components = Vec::new();
        for (k, c) in self.components.iter().zip(refinements) {
            for l in &c.components {
                components.push(k.then(l)?);
            }
        }
        Ok(Opcover { base: self.base.clone(), components })
    }
}

/// Checks by hom search that each local form factors through some component.
pub fn is_opcover(ctx: SpectralContext, c: &Opcover) -> Result<bool> {
    let forms = ctx.local_forms(&c.base)?;
    Ok(forms.iter().all(|p| c.components.iter().any(|k| p.through(k).is_some())))
}

/// Level 1 over the pair `(i0, i1)`: the pushout `K_i0 ⊗_R K_i1` and a cover of it.
#[derive(Clone, Debug)]
pub struct Overlap {
    pub pair: (usize, usize),
    pub pushout: Pushout,
    pub cover: Opcover,
}

/// A truncated hypercover: a level-0 opcover and, for each pair of components, a cover of
/// their overlap.
#[derive(Clone, Debug)]
pub struct Hyperopcover {
    level0: Opcover,
    level1: Vec<Overlap>,
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i..n).map(move |j| (i, j)))
}

impl Hyperopcover {
    /// The Čech hypercover: each overlap covered by itself.
    pub fn kernel(ctx: SpectralContext, level0: Opcover) -> Result<Self> {
        Hyperopcover::with_level1(ctx, level0, |_, po| Ok(Opcover::trivial(&po.apex)))
    }

    /// Uses `cover(pair, pushout)` at level 1, checking each is an opcover.
    pub fn with_level1(
        ctx: SpectralContext,
        level0: Opcover,
        mut cover: impl FnMut((usize, usize), &Pushout) -> Result<Opcover>,
    ) -> Result<Self> {
        if !is_opcover(ctx, &level0)? {
            return Err(Error::Input("level 0 does not cover".into()));
        }
        let ks = &level0.components;
        let mut level1 = Vec::new();
        for (i, j) in pairs(ks.len()) {
            let po = pushout(ks[i].map(), ks[j].map(), DEFAULT_SIZE_BOUND)?;
            let c = cover((i, j), &po)?;
            if !same(&c.base, &po.apex) || !is_opcover(ctx, &c)? {
                return Err(Error::Input(format!("level 1 over ({i},{j}) does not cover the overlap")));
            }
            level1.push(Overlap { pair: (i, j), pushout: po, cover: c });
        }
        Ok(Hyperopcover { level0, level1 })
    }

    pub fn level0(&self) -> &Opcover {
        &self.level0
    }

    pub fn level1(&self) -> &[Overlap] {
        &self.level1
    }

    pub fn base(&self) -> &Arc<FiniteAlgebra> {
        &self.level0.base
    }

    /// Pushes every level along `f : R → S`.
    pub fn push_forward(&self, ctx: SpectralContext, f: &Hom) -> Result<(Hyperopcover, PushMaps)> {
        let (level0, at0) = self.level0.push_forward(ctx, f)?;
        let mut at1 = Vec::new();
        let ks = &level0.components;
        let mut level1 = Vec::new();
        for o in &self.level1 {
            let (i, j) = o.pair;
            let po = pushout(ks[i].map(), ks[j].map(), DEFAULT_SIZE_BOUND)?;
            let u = crate::algebra::induced_from_pushout(&o.pushout, &at0[i].then(&po.left)?, &at0[j].then(&po.right)?)
                .ok_or_else(|| Error::InvariantViolation("pushed overlaps are not compatible".into()))?;
            let (cover, maps) = o.cover.push_forward(ctx, &u)?;
            level1.push(Overlap { pair: o.pair, pushout: po, cover });
            at1.push(maps);
        }
        Ok((Hyperopcover { level0, level1 }, PushMaps { level0: at0, level1: at1 }))
    }
}

/// Component maps `K → f_* K` of a pushed-forward hypercover.
#[derive(Clone, Debug)]
pub struct PushMaps {
    pub level0: Vec<Hom>,
    pub level1: Vec<Vec<Hom>>,
}

pub fn kernel_hyperopcover(ctx: SpectralContext, c: Opcover) -> Result<Hyperopcover> {
    Hyperopcover::kernel(ctx, c)
}

/// `H⁰K•`: the equalizer of `Π K⁰ ⇉ Π K¹`, with the induced map from the base.
#[derive(Clone, Debug)]
pub struct H0 {
    pub limit: Limit,
    pub from_base: Hom,
}

impl H0 {
    pub fn apex(&self) -> &Arc<FiniteAlgebra> {
        &self.limit.apex
    }
}

/// Limit objects are the level-0 components, then each level-1 component in order.
pub fn h0(k: &Hyperopcover) -> Result<H0> {
    let base = k.base();
    let mut d = Diagram::new(base.kind());
    let mut legs = Vec::new();
    for c in &k.level0.components {
        d.object(c.target().clone());
        legs.push(c.map().clone());
    }
    for o in &k.level1 {
        let (i, j) = o.pair;
        for l in &o.cover.components {
            let at = d.object(l.target().clone());
            let left = o.pushout.left.then(l.map())?;
            let right = o.pushout.right.then(l.map())?;
            legs.push(k.level0.components[i].map().then(&left)?);
            d.arrow(i, at, left);
            d.arrow(j, at, right);
        }
    }
    let lim = limit(&d, DEFAULT_SIZE_BOUND)?;
    let from_base = lim.lift(base, &legs)?;
    Ok(H0 { limit: lim, from_base })
}

/// For a cover with an isomorphism among its level-0 components, `R → H⁰K•` must be an
/// isomorphism. Only meaningful where every algebra is its own reduction.
pub fn split_cover_check(ctx: SpectralContext, k: &Hyperopcover) -> Result<Hom> {
    if ctx == SpectralContext::Domain {
        return Err(Error::Input("split covers are only checked in the zariski and deitmar contexts".into()));
    }
    if !k.level0.components.iter().any(|c| c.map().is_bijective()) {
        return Err(Error::Input("no level-0 component is an isomorphism".into()));
    }
    let h = h0(k)?;
    if !h.from_base.is_bijective() {
        return Err(Error::InvariantViolation(format!(
            "split cover of an algebra of size {} has H0 of size {}",
            k.base().len(),
            h.apex().len()
        )));
    }
    Ok(h.from_base)
}

/// Covers by at most `max_components` finite localizations, up to isomorphism of components.
pub fn opcovers(ctx: SpectralContext, r: &Arc<FiniteAlgebra>, max_components: usize) -> Result<Vec<Opcover>> {
    let locs = ctx.finite_localizations(r)?;
    let forms = ctx.local_forms(r)?;
    // which forms each localization carries
    let hits: Vec<u64> = locs
        .iter()
        .map(|k| {
            let key = k.key();
            forms.iter().enumerate().filter(|(_, p)| key.refines(&p.key())).fold(0u64, |a, (i, _)| a | 1 << i)
        })
        .collect();
    let all = if forms.is_empty() { 0 } else { u64::MAX >> (64 - forms.len()) };
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn rec(
        from: usize,
        cover: u64,
        max: usize,
        all: u64,
        hits: &[u64],
        chosen: &mut Vec<usize>,
        found: &mut Vec<Vec<usize>>,
    ) {
        if cover == all && !chosen.is_empty() {
            found.push(chosen.clone());
        }
        if chosen.len() == max {
            return;
        }
        for i in from..hits.len() {
            chosen.push(i);
            rec(i + 1, cover | hits[i], max, all, hits, chosen, found);
            chosen.pop();
        }
    }
    let mut found = Vec::new();
    rec(0, 0, max_components, all, &hits, &mut chosen, &mut found);
    for idx in found {
        out.push(Opcover { base: r.clone(), components: idx.into_iter().map(|i| locs[i].clone()).collect() });
    }
    Ok(out)
}

/// `H⁰(coarse) → H⁰(fine)` when `fine` refines `coarse`, both Čech over the same base.
pub fn refinement_map(fine: &Hyperopcover, coarse: &Hyperopcover) -> Result<Option<Hom>> {
    if !same(fine.base(), coarse.base()) {
        return Err(Error::Input("hypercovers over different bases".into()));
    }
    let mut through = Vec::new();
    for l in &fine.level0.components {
        match coarse.level0.components.iter().enumerate().find_map(|(i, k)| l.through(k).map(|u| (i, u))) {
            Some(t) => through.push(t),
            None => return Ok(None),
        }
    }
    let (hc, hf) = (h0(coarse)?, h0(fine)?);
    let mut map = Vec::with_capacity(hc.apex().len());
    for s in 0..hc.apex().len() {
        let t = hc.limit.tuple(s);
        let level0: Vec<usize> = through.iter().map(|(i, u)| u.apply(t[*i] as usize)).collect();
        let mut tuple: Vec<u32> = level0.iter().map(|&v| v as u32).collect();
        for o in &fine.level1 {
            for l in &o.cover.components {
                tuple.push(o.pushout.left.then(l.map())?.apply(level0[o.pair.0]) as u32);
            }
        }
        let v = hf
            .limit
            .lookup(&tuple)
            .ok_or_else(|| Error::InvariantViolation("refined sections are not compatible".into()))?;
        map.push(v);
    }
    Ok(Some(Hom::new(hc.apex().clone(), hf.apex().clone(), map)?))
}

/// `H⁰` of the finest Čech cover, with a check that every cover in `covers` maps into it
/// compatibly with the base. This is where the colimit over covers stabilizes.
pub fn stabilized_h0(ctx: SpectralContext, r: &Arc<FiniteAlgebra>, covers: &[Opcover]) -> Result<(Hyperopcover, H0)> {
    let finest = Hyperopcover::kernel(ctx, Opcover::finest(ctx, r)?)?;
    let h = h0(&finest)?;
    for c in covers {
        let k = Hyperopcover::kernel(ctx, c.clone())?;
        let m = refinement_map(&finest, &k)?
            .ok_or_else(|| Error::InvariantViolation("local forms do not refine a cover".into()))?;
        if h0(&k)?.from_base.then(&m)?.map() != h.from_base.map() {
            return Err(Error::InvariantViolation("refinement map is not under the base".into()));
        }
    }
    Ok((finest, h))
}
