//! Reduction of an algebra through its canonical map to the product of its local forms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{induced_from_pushout, product, same, Congruence};
use crate::algebra::{pushout, quotient, FiniteAlgebra, Hom, QuotientBy, DEFAULT_SIZE_BOUND};
use crate::context::{descend, CellOrder, LocalForm, Localization, SpectralContext};
use crate::error::{Error, Result};
use crate::hypercover::{h0, Hyperopcover};
use crate::spectrum::{build_spec, distinguished_open, spec_map, SpectralSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionClass {
    /// Through (localization, admissible).
    Admissible,
    /// Through (regular epi, mono).
    Mono,
}

/// `ℓ_R = factor ∘ unit` with `ℓ_R : R → Π P_α`, maps into the product given by their legs.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub class: ReductionClass,
    pub forms: Vec<LocalForm>,
    pub unit: Hom,
    pub factor: Vec<Hom>,
    /// Cells attached by the admissible reduction.
    pub path: Option<Localization>,
}

impl Reduction {
    pub fn reduced(&self) -> &Arc<FiniteAlgebra> {
        self.unit.target()
    }
}

/// `ℓ_R : R → Π P_α` as an honest map into the product. The product can be large, so the
/// reduction itself only works with the legs.
pub fn canonical_map(ctx: SpectralContext, r: &Arc<FiniteAlgebra>) -> Result<Hom> {
    let forms = ctx.local_forms(r)?;
    let targets: Vec<Arc<FiniteAlgebra>> = forms.iter().map(|p| p.target().clone()).collect();
    let (prod, _) = product(ctx.kind(), &targets, DEFAULT_SIZE_BOUND)?;
    let mut stride = vec![1usize; targets.len()];
    for i in (0..targets.len().saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * targets[i + 1].len();
    }
    let map = (0..r.len()).map(|a| forms.iter().enumerate().map(|(i, p)| p.map().apply(a) * stride[i]).sum()).collect();
    Hom::new(r.clone(), prod, map)
}

fn legs(forms: &[LocalForm]) -> Vec<Hom> {
    forms.iter().map(|p| p.map().clone()).collect()
}

pub fn reduce(ctx: SpectralContext, r: &Arc<FiniteAlgebra>, class: ReductionClass) -> Result<Reduction> {
    let forms = ctx.local_forms(r)?;
    let ell = legs(&forms);
    match class {
        ReductionClass::Admissible => {
            let (loc, factor) = ctx.factorize_family(r, &ell, CellOrder::Forward)?;
            if !ctx.is_admissible_family(loc.target(), &factor) {
                return Err(Error::InvariantViolation("reduction left a non-admissible factor".into()));
            }
            Ok(Reduction { class, forms, unit: loc.map().clone(), factor, path: Some(loc) })
        }
        ReductionClass::Mono => {
            // joint kernel: elements with the same image in every local form
            let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let classes = (0..r.len())
                .map(|a| {
                    let next = ids.len();
                    *ids.entry(ell.iter().map(|g| g.apply(a)).collect()).or_insert(next)
                })
                .collect();
            let kernel = Congruence::from_classes(classes);
            let (_, unit) = quotient(r, &QuotientBy::Congruence(kernel))?;
            let factor = ell.iter().map(|g| descend(g, &unit)).collect::<Result<_>>()?;
            Ok(Reduction { class, forms, unit, factor, path: None })
        }
    }
}

pub fn red(ctx: SpectralContext, r: &Arc<FiniteAlgebra>) -> Result<Hom> {
    Ok(reduce(ctx, r, ReductionClass::Admissible)?.unit)
}

pub fn is_reduced(ctx: SpectralContext, r: &Arc<FiniteAlgebra>) -> Result<bool> {
    Ok(ctx.is_admissible_family(r, &legs(&ctx.local_forms(r)?)))
}

pub fn is_mono_reduced(ctx: SpectralContext, r: &Arc<FiniteAlgebra>) -> Result<bool> {
    let ell = legs(&ctx.local_forms(r)?);
    let mut seen = BTreeSet::new();
    Ok((0..r.len()).all(|a| seen.insert(ell.iter().map(|g| g.apply(a)).collect::<Vec<_>>())))
}

pub fn is_fixed_point(ctx: SpectralContext, r: &Arc<FiniteAlgebra>) -> Result<bool> {
    let spec = build_spec(ctx, r)?;
    Ok(spec.counit().expect("affine").is_bijective())
}

/// Evidence behind a geometric-isomorphism verdict.
#[derive(Clone, Debug)]
pub enum GeometricCertificate {
    /// For each local form `p : R → P`, the bijection `P → red(f_* P)`.
    PushoutIsos(Vec<Hom>),
    /// The local form whose pushout does not reduce back to it.
    Obstruction { form: usize, pushout_size: usize, reduced_size: usize },
}

#[derive(Clone, Debug)]
pub struct GeometricVerdict {
    pub is_iso: bool,
    pub certificate: GeometricCertificate,
}

/// Whether `f` induces an isomorphism of spectra, decided by pushing out along every local
/// form of the source and reducing.
pub fn is_geometric_iso(ctx: SpectralContext, f: &Hom) -> Result<GeometricVerdict> {
    ctx.check_algebra(f.source())?;
    let forms = ctx.local_forms(f.source())?;
    let mut isos = Vec::with_capacity(forms.len());
    for (i, p) in forms.iter().enumerate() {
        let po = pushout(p.map(), f, DEFAULT_SIZE_BOUND)?;
        let u = red(ctx, &po.apex)?;
        let across = po.left.then(&u)?;
        if !across.is_bijective() {
            return Ok(GeometricVerdict {
                is_iso: false,
                certificate: GeometricCertificate::Obstruction {
                    form: i,
                    pushout_size: po.apex.len(),
                    reduced_size: u.target().len(),
                },
            });
        }
        isos.push(across);
    }
    Ok(GeometricVerdict { is_iso: true, certificate: GeometricCertificate::PushoutIsos(isos) })
}

/// Direct check: builds both spectra and tests whether `Spec f` is an isomorphism.
pub fn is_spec_iso(ctx: SpectralContext, f: &Hom) -> Result<bool> {
    let x = Arc::new(build_spec(ctx, f.target())?);
    let y = Arc::new(build_spec(ctx, f.source())?);
    Ok(spec_map(&x, &y, f)?.is_iso())
}

/// Distinguished opens of `Spec R` against those of `Spec red R`, matched by pushing each finite
/// localization out along the reduction unit. True when this is a bijection.
pub fn dist_op_bijection(ctx: SpectralContext, r: &Arc<FiniteAlgebra>) -> Result<bool> {
    let unit = red(ctx, r)?;
    let spec_r = Arc::new(build_spec(ctx, r)?);
    let spec_red = Arc::new(build_spec(ctx, unit.target())?);
    let m = spec_map(&spec_red, &spec_r, &unit)?;
    if !m.is_iso() {
        return Ok(false);
    }
    let mut pairing: BTreeMap<u64, u64> = BTreeMap::new();
    for k in ctx.finite_localizations(r)? {
        let here = distinguished_open(&spec_r, &k);
        let po = pushout(k.map(), &unit, DEFAULT_SIZE_BOUND)?;
        let there = distinguished_open_by_kernel(&spec_red, &po.right.kernel());
        // carry back to points of Spec R
        let back =
            m.points().iter().enumerate().filter(|&(q, _)| there >> q & 1 == 1).fold(0u64, |a, (_, &x)| a | 1 << x);
        if *pairing.entry(here).or_insert(back) != back {
            return Ok(false);
        }
    }
    let images: BTreeSet<u64> = pairing.values().copied().collect();
    let red_basis: BTreeSet<u64> = spec_red
        .affine()
        .expect("affine")
        .basis
        .iter()
        .map(|(mask, _)| {
            m.points().iter().enumerate().filter(|&(q, _)| mask >> q & 1 == 1).fold(0u64, |a, (_, &x)| a | 1 << x)
        })
        .collect();
    Ok(images.len() == pairing.len() && images == red_basis)
}

fn distinguished_open_by_kernel(space: &SpectralSpace, key: &Congruence) -> u64 {
    let aff = space.affine().expect("affine");
    aff.forms.iter().enumerate().filter(|(_, p)| key.refines(&p.key())).fold(0, |a, (i, _)| a | 1 << i)
}

/// Whether pushing out along the local form `p` commutes with `H⁰K•`, i.e. the canonical
/// `p_*(H⁰K•) → H⁰(p_*K•)` is bijective.
pub fn check_flat_wrt_cover(ctx: SpectralContext, p: &LocalForm, k: &Hyperopcover) -> Result<bool> {
    if !same(p.source(), k.base()) {
        return Err(Error::Input("local form and cover have different bases".into()));
    }
    let here = h0(k)?;
    let (pushed, maps) = k.push_forward(ctx, p.map())?;
    let there = h0(&pushed)?;
    let mut component_maps: Vec<&Hom> = maps.level0.iter().collect();
    component_maps.extend(maps.level1.iter().flatten());
    let across = (0..here.apex().len())
        .map(|s| {
            let t: Vec<u32> =
                here.limit.tuple(s).iter().zip(&component_maps).map(|(&v, h)| h.apply(v as usize) as u32).collect();
            there.limit.lookup(&t).ok_or_else(|| Error::InvariantViolation("pushed sections are not compatible".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let across = Hom::new(here.apex().clone(), there.apex().clone(), across)?;
    let po = pushout(&here.from_base, p.map(), DEFAULT_SIZE_BOUND)?;
    let canonical = induced_from_pushout(&po, &across, &there.from_base)
        .ok_or_else(|| Error::InvariantViolation("comparison map does not exist".into()))?;
    Ok(canonical.is_bijective())
}
