use std::path::Path;
use std::sync::Arc;

use conespec::algebra::{AlgebraKind, FiniteAlgebra, Hom};
use conespec::glue::{self, AffineWitness};
use conespec::hypercover::{kernel_hyperopcover, opcovers};
use conespec::io;
use conespec::nerve::{nerve as build_nerve, sheaf_condition, Site};
use conespec::reduction::{
    canonical_map, check_flat_wrt_cover, is_fixed_point, is_geometric_iso, is_mono_reduced, is_reduced, reduce,
    GeometricCertificate, ReductionClass,
};
use conespec::spectrum::{build_spec, SpectralSpace};
use conespec::{Error, Result, SpectralContext};
use serde_json::{json, Value};

use crate::{Property, RunConfig};

pub struct Outcome {
    pub stdout: String,
    /// False makes the process exit with 1.
    pub holds: bool,
}

fn emit(v: Value, holds: bool) -> Result<Outcome> {
    Ok(Outcome { stdout: serde_json::to_string_pretty(&v).expect("serializable") + "\n", holds })
}

fn stem(p: &Path) -> String {
    let name = p.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    name.split('.').next().filter(|s| !s.is_empty()).unwrap_or("out").to_string()
}

fn context_for(cfg: &RunConfig, kind: AlgebraKind) -> Result<SpectralContext> {
    let ctx = cfg.context.unwrap_or(match kind {
        AlgebraKind::Ring => SpectralContext::Zariski,
        AlgebraKind::Monoid => SpectralContext::Deitmar,
    });
    if ctx.kind() != kind {
        return Err(Error::KindMismatch(format!("a {kind} in the {ctx} context")));
    }
    Ok(ctx)
}

fn bounded(cfg: &RunConfig, a: FiniteAlgebra) -> Result<Arc<FiniteAlgebra>> {
    if a.len() > cfg.size_bound {
        return Err(Error::SizeBound { limit: cfg.size_bound, attempted: a.len() });
    }
    Ok(Arc::new(a))
}

fn load_algebra(cfg: &RunConfig) -> Result<(Arc<FiniteAlgebra>, SpectralContext)> {
    let a = bounded(cfg, io::read_algebra(cfg.input()?)?)?;
    let ctx = context_for(cfg, a.kind())?;
    Ok((a, ctx))
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn write_space(cfg: &RunConfig, name: &str, x: &SpectralSpace) -> Result<Vec<String>> {
    let dot = io::write_artifact(&cfg.out_dir, &format!("{name}.dot"), &io::space_to_dot(x))?;
    let space = io::write_artifact(&cfg.out_dir, &format!("{name}.space"), &io::space_to_json(x))?;
    Ok(vec![display(&dot), display(&space)])
}

fn points(x: &SpectralSpace) -> Vec<Value> {
    (0..x.points()).map(|p| json!({ "label": x.labels()[p], "stalk": io::algebra_name(x.stalk(p)) })).collect()
}

pub fn spec(cfg: &RunConfig) -> Result<Outcome> {
    let (r, ctx) = load_algebra(cfg)?;
    let x = build_spec(ctx, &r)?;
    let aff = x.affine().expect("spectrum");
    let counit = x.counit().expect("spectrum");
    let artifacts = write_space(cfg, &stem(cfg.input()?), &x)?;
    emit(
        json!({
            "command": "spec",
            "context": ctx,
            "input": display(cfg.input()?),
            "points": points(&x),
            "opens": x.topology().len(),
            "global_sections": io::algebra_name(x.global_sections()),
            "counit": if counit.is_bijective() { "iso" } else { "not iso" },
            "canonical_presheaf_is_sheaf": aff.canonical_is_sheaf,
            "artifacts": artifacts,
        }),
        true,
    )
}

/// Pairs of elements a map identifies, by label, and the first element not kept apart from a
/// smaller one.
fn collapsed(h: &Hom) -> (Vec<Vec<String>>, Option<String>) {
    let r = h.source();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for a in 0..r.len() {
        match classes.iter_mut().find(|c| h.apply(c[0]) == h.apply(a)) {
            Some(c) => c.push(a),
            None => classes.push(vec![a]),
        }
    }
    let witness = (0..r.len()).find(|&a| (0..a).any(|b| h.apply(b) == h.apply(a))).map(|a| r.label(a).to_string());
    let big = classes
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|c| c.into_iter().map(|a| r.label(a).to_string()).collect())
        .collect();
    (big, witness)
}

pub fn check(cfg: &RunConfig) -> Result<Outcome> {
    let property = cfg.property.ok_or_else(|| Error::Input("check needs --property".into()))?;
    if property == Property::GeometricIso {
        return check_geometric_iso(cfg);
    }
    let (r, ctx) = load_algebra(cfg)?;
    let (name, verdict, certificate) = match property {
        Property::Reduced => {
            let red = reduce(ctx, &r, ReductionClass::Admissible)?;
            let (pairs, witness) = collapsed(&red.unit);
            let verdict = is_reduced(ctx, &r)?;
            let cert = json!({
                "local_forms": red.forms.len(),
                "reduction_size": red.reduced().len(),
                "reduction": io::algebra_name(red.reduced()),
                "reduction_path": red.path.as_ref().map(io::localization_to_json),
                "identified": pairs,
                "witness": witness,
            });
            ("reduced", verdict, cert)
        }
        Property::MonoReduced => {
            let m = reduce(ctx, &r, ReductionClass::Mono)?;
            let (pairs, witness) = collapsed(&m.unit);
            let verdict = is_mono_reduced(ctx, &r)?;
            let product = canonical_map(ctx, &r).map(|h| h.target().len()).ok();
            let cert = json!({
                "local_forms": m.forms.len(),
                "product_size": product,
                "identified": pairs,
                "witness": witness,
            });
            ("mono-reduced", verdict, cert)
        }
        Property::FixedPoint => {
            let x = build_spec(ctx, &r)?;
            let counit = x.counit().expect("spectrum");
            let (pairs, witness) = collapsed(counit);
            let verdict = is_fixed_point(ctx, &r)?;
            let cert = json!({
                "points": x.points(),
                "global_sections": io::algebra_name(x.global_sections()),
                "global_sections_size": x.global_sections().len(),
                "counit": counit.map(),
                "identified": pairs,
                "witness": witness,
            });
            ("fixed-point", verdict, cert)
        }
        Property::FlatCover => {
            let forms = ctx.local_forms(&r)?;
            let covers = opcovers(ctx, &r, 2)?;
            let mut squares = 0;
            let mut failure = Value::Null;
            'outer: for c in &covers {
                let k = kernel_hyperopcover(ctx, c.clone())?;
                for (i, p) in forms.iter().enumerate() {
                    squares += 1;
                    if !check_flat_wrt_cover(ctx, p, &k)? {
                        let comps: Vec<Value> = c.components().iter().map(io::localization_to_json).collect();
                        failure = json!({ "local_form": i, "cover": comps });
                        break 'outer;
                    }
                }
            }
            let verdict = failure.is_null();
            let cert = json!({
                "local_forms": forms.len(),
                "covers": covers.len(),
                "max_components": 2,
                "squares": squares,
                "failure": failure,
            });
            ("flat-cover", verdict, cert)
        }
        Property::GeometricIso => unreachable!(),
    };
    emit(
        json!({
            "command": "check",
            "property": name,
            "context": ctx,
            "input": display(cfg.input()?),
            "verdict": verdict,
            "certificate": certificate,
        }),
        verdict,
    )
}

fn check_geometric_iso(cfg: &RunConfig) -> Result<Outcome> {
    let path =
        cfg.hom.as_ref().or(cfg.input.as_ref()).ok_or_else(|| Error::Input("geometric-iso needs --hom".into()))?;
    let f = io::read_hom(path)?;
    for a in [f.source(), f.target()] {
        bounded(cfg, (**a).clone())?;
    }
    let ctx = context_for(cfg, f.source().kind())?;
    let v = is_geometric_iso(ctx, &f)?;
    let cert = match &v.certificate {
        GeometricCertificate::PushoutIsos(isos) => json!({
            "pushout_isos": isos.iter().map(|h| h.map()).collect::<Vec<_>>(),
        }),
        GeometricCertificate::Obstruction { form, pushout_size, reduced_size } => json!({
            "obstruction": { "local_form": form, "pushout_size": pushout_size, "reduced_size": reduced_size },
        }),
    };
    emit(
        json!({
            "command": "check",
            "property": "geometric-iso",
            "context": ctx,
            "hom": display(path),
            "verdict": v.is_iso,
            "certificate": cert,
        }),
        v.is_iso,
    )
}

pub fn glue(cfg: &RunConfig) -> Result<Outcome> {
    let g = io::read_gluing(cfg.input()?)?;
    if let Some(ctx) = cfg.context {
        if ctx != g.context {
            return Err(Error::Input(format!("gluing spec is in the {} context, not {ctx}", g.context)));
        }
    }
    for c in &g.charts {
        bounded(cfg, (**c).clone())?;
    }
    let glued = glue::glue(&g)?;
    let x = &glued.space;
    let v = glue::is_affine(x)?;
    let witness = match &v.witness {
        AffineWitness::Unit(u) => json!({ "unit": u.points() }),
        AffineWitness::PointCounts { space, spectrum } => json!({ "points": space, "spectrum_points": spectrum }),
        AffineWitness::NoIsomorphism { space, spectrum } => {
            json!({ "stalk_sizes": space, "spectrum_stalk_sizes": spectrum })
        }
    };
    let artifacts = write_space(cfg, &stem(cfg.input()?), x)?;
    emit(
        json!({
            "command": "glue",
            "context": g.context,
            "input": display(cfg.input()?),
            "charts": g.charts.len(),
            "points": points(x),
            "opens": x.topology().len(),
            "global_sections": io::algebra_name(x.global_sections()),
            "is_affine": v.is_affine,
            "witness": witness,
            "artifacts": artifacts,
        }),
        true,
    )
}

fn site_for(cfg: &RunConfig, ctx: SpectralContext) -> Result<Site> {
    match cfg.site.as_str() {
        "default" => Site::default_for(ctx),
        s => match s.strip_prefix("corpus:").map(str::parse::<usize>) {
            Some(Ok(n)) if n >= 1 => Site::corpus(ctx, n),
            _ => Err(Error::Input(format!("unknown site {s:?}; use default or corpus:N"))),
        },
    }
}

pub fn nerve(cfg: &RunConfig) -> Result<Outcome> {
    let x = Arc::new(io::read_space(cfg.input()?)?);
    if let Some(ctx) = cfg.context {
        if ctx != x.context() {
            return Err(Error::Input(format!("space is in the {} context, not {ctx}", x.context())));
        }
    }
    let site = site_for(cfg, x.context())?;
    let table = build_nerve(&x, &site)?;
    let covers = sheaf_condition(&x, &site, &table)?;
    let holds = covers.iter().all(|c| c.holds);
    let name = stem(cfg.input()?);
    let report = io::write_artifact(
        &cfg.out_dir,
        &format!("{name}.nerve.json"),
        &io::nerve_report(&site, &cfg.site, &table, &covers),
    )?;
    let counts: serde_json::Map<String, Value> =
        site.objects().iter().zip(table.counts()).map(|(o, c)| (o.name.clone(), Value::from(c))).collect();
    emit(
        json!({
            "command": "nerve",
            "context": x.context(),
            "input": display(cfg.input()?),
            "site": cfg.site,
            "site_objects": site.objects().len(),
            "counts": counts,
            "functorial": table.is_functorial(&site),
            "covers_checked": covers.len(),
            "sheaf_condition": if holds { "PASS" } else { "FAIL" },
            "artifacts": [display(&report)],
        }),
        holds,
    )
}

pub fn local_forms(cfg: &RunConfig) -> Result<Outcome> {
    let (r, ctx) = load_algebra(cfg)?;
    let rounds = cfg.rounds.unwrap_or(r.len() + 2);
    let sat = ctx.saturate_bounded(&r, rounds)?;
    let forms = ctx.local_forms(&r)?;
    let agree = sat.forms.len() == forms.len() && forms.iter().all(|p| sat.forms.iter().any(|q| q.key() == p.key()));
    if !agree {
        return Err(Error::InvariantViolation("saturation and direct enumeration disagree".into()));
    }
    let list: Vec<Value> = forms
        .iter()
        .map(|p| {
            json!({
                "prime": ctx.prime_of(p).members().iter().map(|&a| r.label(a)).collect::<Vec<_>>(),
                "target": io::algebra_name(p.target()),
                "target_size": p.target().len(),
                "path": io::localization_to_json(p),
            })
        })
        .collect();
    emit(
        json!({
            "command": "local-forms",
            "context": ctx,
            "input": display(cfg.input()?),
            "saturation_rounds": sat.rounds,
            "local_forms": list,
        }),
        true,
    )
}
