//! File formats: algebras, homs, cell paths, gluing specs, spaces, and DOT output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::algebra::{find_isomorphism, AlgebraKind, FiniteAlgebra, Hom};
use crate::context::{Branch, CellDatum, Localization, SpectralContext};
use crate::corpus;
use crate::error::{Error, Result};
use crate::glue::{GlueOverlap, GluingSpec};
use crate::nerve::{CoverCheck, NerveTable, Site};
use crate::spectrum::{members, Sheaf, SpectralSpace, Topology};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraFile {
    kind: AlgebraKind,
    elements: Vec<String>,
    mul: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    add: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zero: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    one: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unit: Option<usize>,
}

fn bad_json(what: &str, e: serde_json::Error) -> Error {
    Error::Input(format!("{what}: {e}"))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

impl AlgebraFile {
    fn build(self) -> Result<FiniteAlgebra> {
        match self.kind {
            AlgebraKind::Ring => {
                let add = self.add.ok_or_else(|| Error::Input("ring without an add table".into()))?;
                let zero = self.zero.ok_or_else(|| Error::Input("ring without zero".into()))?;
                let one = self.one.or(self.unit).ok_or_else(|| Error::Input("ring without one".into()))?;
                FiniteAlgebra::ring(self.elements, add, self.mul, zero, one)
            }
            AlgebraKind::Monoid => {
                if self.add.is_some() || self.zero.is_some() {
                    return Err(Error::Input("monoids carry no additive structure".into()));
                }
                let unit = self.unit.or(self.one).ok_or_else(|| Error::Input("monoid without unit".into()))?;
                FiniteAlgebra::monoid(self.elements, self.mul, unit)
            }
        }
    }
}

pub fn algebra_from_json(text: &str) -> Result<FiniteAlgebra> {
    let f: AlgebraFile = serde_json::from_str(text).map_err(|e| bad_json("algebra", e))?;
    f.build()
}

pub fn read_algebra(path: &Path) -> Result<FiniteAlgebra> {
    algebra_from_json(&read_file(path)?).map_err(|e| match e {
        Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
        e => e,
    })
}

fn write_table(out: &mut String, name: &str, t: &[Vec<usize>]) {
    let n = t.len();
    let _ = write!(out, "  \"{name}\": [");
    for (i, row) in t.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        let sep = if i + 1 == n { "\n  ]" } else { "," };
        let _ = write!(out, "\n    [{}]{sep}", cells.join(", "));
    }
    out.push_str(",\n");
}

/// Canonical text of an algebra: one table row per line. `algebra_from_json` inverts it exactly.
pub fn algebra_to_json(a: &FiniteAlgebra) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"kind\": \"{}\",", a.kind());
    let labels: Vec<String> = a.labels().iter().map(|l| Value::from(l.as_str()).to_string()).collect();
    let _ = writeln!(out, "  \"elements\": [{}],", labels.join(", "));
    write_table(&mut out, "mul", &a.mul_table());
    if let Some(add) = a.add_table() {
        write_table(&mut out, "add", &add);
    }
    match a.zero() {
        Some(z) => {
            let _ = write!(out, "  \"zero\": {z},\n  \"one\": {}\n}}\n", a.one());
        }
        None => {
            let _ = write!(out, "  \"unit\": {}\n}}\n", a.one());
        }
    }
    out
}

/// Corpus algebra by name, in either corpus.
pub fn corpus_algebra(name: &str) -> Option<FiniteAlgebra> {
    corpus::ring_corpus().into_iter().chain(corpus::monoid_corpus()).find(|(n, _)| n == name).map(|(_, a)| a)
}

/// Corpus name of an algebra up to isomorphism.
pub fn corpus_name(a: &Arc<FiniteAlgebra>) -> Option<String> {
    let list = match a.kind() {
        AlgebraKind::Ring => corpus::ring_corpus(),
        AlgebraKind::Monoid => corpus::monoid_corpus(),
    };
    list.into_iter()
        .filter(|(_, b)| b.len() == a.len())
        .find(|(_, b)| find_isomorphism(a, &Arc::new(b.clone())).is_some())
        .map(|(n, _)| n)
}

/// Corpus name, or a description by size.
pub fn algebra_name(a: &Arc<FiniteAlgebra>) -> String {
    corpus_name(a).unwrap_or_else(|| format!("{} of order {}", a.kind(), a.len()))
}

/// Loads an algebra named in another file: a path relative to `base`, else a corpus name.
pub fn resolve_algebra(name: &str, base: &Path) -> Result<FiniteAlgebra> {
    let p = base.join(name);
    if p.is_file() {
        return read_algebra(&p);
    }
    corpus_algebra(name).ok_or_else(|| Error::Input(format!("no algebra file or corpus algebra named {name:?}")))
}

/// An element by index or by label.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum ElementRef {
    Index(usize),
    Label(String),
}

impl ElementRef {
    fn resolve(&self, a: &FiniteAlgebra) -> Result<usize> {
        match self {
            ElementRef::Index(i) if *i < a.len() => Ok(*i),
            ElementRef::Index(i) => Err(Error::Input(format!("element {i} out of range ({} elements)", a.len()))),
            ElementRef::Label(l) => a.index_of(l).ok_or_else(|| Error::Input(format!("no element labelled {l:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HomFile {
    source: String,
    target: String,
    map: Vec<ElementRef>,
}

fn resolve_map(map: &[ElementRef], source: &Arc<FiniteAlgebra>, target: &Arc<FiniteAlgebra>) -> Result<Hom> {
    let idx = map.iter().map(|e| e.resolve(target)).collect::<Result<Vec<_>>>()?;
    Hom::new(source.clone(), target.clone(), idx)
}

/// A hom file; `source` and `target` name algebra files next to it or corpus algebras.
pub fn read_hom(path: &Path) -> Result<Hom> {
    let f: HomFile = serde_json::from_str(&read_file(path)?).map_err(|e| bad_json("hom", e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let s = Arc::new(resolve_algebra(&f.source, base)?);
    let t = Arc::new(resolve_algebra(&f.target, base)?);
    resolve_map(&f.map, &s, &t)
}

pub fn hom_to_json(h: &Hom, source: &str, target: &str) -> String {
    let v = json!({ "source": source, "target": target, "map": h.map() });
    serde_json::to_string(&v).expect("serializable") + "\n"
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<ElementRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<ElementRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<ElementRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<ElementRef>,
    branch: Branch,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellStepJson {
    cell: CellJson,
}

fn need<'a>(x: &'a Option<ElementRef>, name: &str, ctx: SpectralContext) -> Result<&'a ElementRef> {
    x.as_ref().ok_or_else(|| Error::Input(format!("{ctx} cell without {name:?}")))
}

/// Replays a cell path from `r`; elements at each step refer to the current target.
fn localization_from_value(ctx: SpectralContext, r: &Arc<FiniteAlgebra>, v: &Value) -> Result<Localization> {
    let steps: Vec<CellStepJson> = serde_json::from_value(v.clone()).map_err(|e| bad_json("cell path", e))?;
    let mut k = Localization::identity(r);
    for CellStepJson { cell } in steps {
        let t = k.target().clone();
        let datum = match ctx {
            SpectralContext::Zariski => CellDatum::Partition {
                r: need(&cell.r, "r", ctx)?.resolve(&t)?,
                s: need(&cell.s, "s", ctx)?.resolve(&t)?,
            },
            SpectralContext::Domain => CellDatum::ZeroProduct {
                a: need(&cell.a, "a", ctx)?.resolve(&t)?,
                b: need(&cell.b, "b", ctx)?.resolve(&t)?,
            },
            SpectralContext::Deitmar => CellDatum::Element { a: need(&cell.a, "a", ctx)?.resolve(&t)? },
        };
        k = k.extend(ctx, datum, cell.branch)?.0;
    }
    Ok(k)
}

pub fn localization_from_json(ctx: SpectralContext, r: &Arc<FiniteAlgebra>, text: &str) -> Result<Localization> {
    let v: Value = serde_json::from_str(text).map_err(|e| bad_json("cell path", e))?;
    localization_from_value(ctx, r, &v)
}

pub fn localization_to_json(k: &Localization) -> Value {
    let cells: Vec<Value> = k
        .steps()
        .iter()
        .map(|st| {
            let (r, s, a, b) = match st.datum {
                CellDatum::Partition { r, s } => (Some(r), Some(s), None, None),
                CellDatum::ZeroProduct { a, b } => (None, None, Some(a), Some(b)),
                CellDatum::Element { a } => (None, None, Some(a), None),
            };
            let idx = |x: Option<usize>| x.map(ElementRef::Index);
            let cell = CellJson { r: idx(r), s: idx(s), a: idx(a), b: idx(b), branch: st.branch };
            serde_json::to_value(CellStepJson { cell }).expect("serializable")
        })
        .collect();
    Value::Array(cells)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartJson {
    context: SpectralContext,
    algebra: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IsoJson {
    #[serde(default)]
    source: Option<String>,
    #[serde(default)]
    target: Option<String>,
    map: Vec<ElementRef>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum IsoSpec {
    Named(String),
    Map(IsoJson),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverlapJson {
    i: usize,
    j: usize,
    k_i: Value,
    k_j: Value,
    iso: IsoSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GluingJson {
    charts: Vec<ChartJson>,
    #[serde(default)]
    overlaps: Vec<OverlapJson>,
}

/// A gluing spec; chart algebras are files relative to `base` or corpus names. An overlap's
/// `iso` is a map `K_i → K_j` by index or label, or `"identity"`.
pub fn gluing_from_json(text: &str, base: &Path) -> Result<GluingSpec> {
    let g: GluingJson = serde_json::from_str(text).map_err(|e| bad_json("gluing spec", e))?;
    let context = g.charts.first().map(|c| c.context).ok_or_else(|| Error::Input("no charts".into()))?;
    if let Some(c) = g.charts.iter().find(|c| c.context != context) {
        return Err(Error::Input(format!("charts mix the {context} and {} contexts", c.context)));
    }
    let charts: Vec<Arc<FiniteAlgebra>> =
        g.charts.iter().map(|c| resolve_algebra(&c.algebra, base).map(Arc::new)).collect::<Result<_>>()?;
    let mut overlaps = Vec::new();
    for o in g.overlaps {
        let chart = |i: usize| {
            charts.get(i).ok_or_else(|| Error::Input(format!("overlap ({},{}) names a missing chart", o.i, o.j)))
        };
        let k_i = localization_from_value(context, chart(o.i)?, &o.k_i)?;
        let k_j = localization_from_value(context, chart(o.j)?, &o.k_j)?;
        let iso = match o.iso {
            IsoSpec::Named(n) if n == "identity" => {
                if k_i.target() != k_j.target() {
                    return Err(Error::Input(format!(
                        "overlap ({},{}): identity between different algebras",
                        o.i, o.j
                    )));
                }
                Hom::new(k_i.target().clone(), k_j.target().clone(), (0..k_i.target().len()).collect())?
            }
            IsoSpec::Named(n) => return Err(Error::Input(format!("unknown iso {n:?}"))),
            IsoSpec::Map(m) => {
                let _ = (m.source, m.target);
                resolve_map(&m.map, k_i.target(), k_j.target())?
            }
        };
        overlaps.push(GlueOverlap { i: o.i, j: o.j, k_i, k_j, iso });
    }
    Ok(GluingSpec { context, charts, overlaps })
}

pub fn read_gluing(path: &Path) -> Result<GluingSpec> {
    gluing_from_json(&read_file(path)?, path.parent().unwrap_or(Path::new(".")))
}

/// Names the distinct stalk tables of a space: corpus name when isomorphic to one, with a
/// suffix when several tables share a name.
fn stalk_names(x: &SpectralSpace) -> (Vec<String>, BTreeMap<String, Arc<FiniteAlgebra>>) {
    let mut tables: BTreeMap<String, Arc<FiniteAlgebra>> = BTreeMap::new();
    let mut names = Vec::new();
    for p in 0..x.points() {
        let a = x.stalk(p);
        if let Some((n, _)) = tables.iter().find(|(_, b)| **b == *a) {
            names.push(n.clone());
            continue;
        }
        let base = algebra_name(a);
        let mut name = base.clone();
        let mut k = 2;
        while tables.contains_key(&name) {
            name = format!("{base} #{k}");
            k += 1;
        }
        tables.insert(name.clone(), a.clone());
        names.push(name);
    }
    (names, tables)
}

/// Space JSON: points, opens, section and stalk names, plus the stalk tables and
/// specialization maps needed to read it back.
pub fn space_to_json(x: &SpectralSpace) -> String {
    let t = x.topology();
    let opens: Vec<Vec<usize>> = t.opens().iter().map(|&w| members(w).collect()).collect();
    let mut sections = Map::new();
    for (i, &w) in t.opens().iter().enumerate() {
        sections.insert(i.to_string(), Value::from(algebra_name(x.sheaf().section(w))));
    }
    let (names, tables) = stalk_names(x);
    let mut stalks = Map::new();
    for (p, n) in names.iter().enumerate() {
        stalks.insert(x.labels()[p].clone(), Value::from(n.as_str()));
    }
    let mut spec = Vec::new();
    for p in 0..x.points() {
        for q in members(t.minimal_open(p)).filter(|&q| q != p) {
            spec.push(json!({ "from": p, "to": q, "map": x.sheaf().specialization(p, q).map() }));
        }
    }
    let algebras: Map<String, Value> = tables
        .iter()
        .map(|(n, a)| (n.clone(), serde_json::from_str(&algebra_to_json(a)).expect("own output")))
        .collect();
    let v = json!({
        "context": x.context(),
        "points": x.labels(),
        "opens": opens,
        "sections": sections,
        "stalks": stalks,
        "specializations": spec,
        "algebras": algebras,
    });
    serde_json::to_string_pretty(&v).expect("serializable") + "\n"
}

#[derive(Deserialize)]
struct SpecializationJson {
    from: usize,
    to: usize,
    map: Vec<usize>,
}

#[derive(Deserialize)]
struct SpaceJson {
    context: SpectralContext,
    points: Vec<String>,
    opens: Vec<Vec<usize>>,
    stalks: BTreeMap<String, String>,
    specializations: Vec<SpecializationJson>,
    algebras: BTreeMap<String, Value>,
    #[serde(default)]
    #[allow(dead_code)]
    sections: Value,
}

pub fn space_from_json(text: &str) -> Result<SpectralSpace> {
    let s: SpaceJson = serde_json::from_str(text).map_err(|e| bad_json("space", e))?;
    let n = s.points.len();
    let mut masks = Vec::new();
    for o in &s.opens {
        if let Some(p) = o.iter().find(|&&p| p >= n) {
            return Err(Error::Input(format!("open names point {p} of {n}")));
        }
        masks.push(o.iter().fold(0u64, |a, &p| a | 1 << p));
    }
    let topology = Arc::new(Topology::from_opens(n, &masks)?);
    let mut tables = BTreeMap::new();
    for (name, v) in &s.algebras {
        let f: AlgebraFile = serde_json::from_value(v.clone()).map_err(|e| bad_json(name, e))?;
        tables.insert(name.clone(), Arc::new(f.build()?));
    }
    let stalks = s
        .points
        .iter()
        .map(|p| {
            let name = s.stalks.get(p).ok_or_else(|| Error::Input(format!("no stalk for point {p:?}")))?;
            tables.get(name).cloned().ok_or_else(|| Error::Input(format!("no table for algebra {name:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut maps = BTreeMap::new();
    for sp in s.specializations {
        if sp.from >= n || sp.to >= n {
            return Err(Error::Input(format!("specialization {} → {} out of range", sp.from, sp.to)));
        }
        let h = Hom::new(stalks[sp.from].clone(), stalks[sp.to].clone(), sp.map)?;
        maps.insert((sp.from, sp.to), h);
    }
    for x in 0..n {
        for y in members(topology.minimal_open(x)).filter(|&y| y != x) {
            if !maps.contains_key(&(x, y)) {
                return Err(Error::Input(format!("missing specialization {} → {}", s.points[x], s.points[y])));
            }
        }
    }
    let sheaf = Sheaf::from_stalks(topology, s.context.kind(), stalks, &|x, y| maps[&(x, y)].clone())?;
    SpectralSpace::new(s.context, s.points, sheaf)
}

pub fn read_space(path: &Path) -> Result<SpectralSpace> {
    space_from_json(&read_file(path)?)
}

/// Specialization order as a DOT digraph, generic points above special ones, Hasse edges only.
pub fn space_to_dot(x: &SpectralSpace) -> String {
    let t = x.topology();
    let mut out = String::from("digraph specialization {\n  rankdir=TB;\n");
    for (p, l) in x.labels().iter().enumerate() {
        let _ = writeln!(out, "  p{p} [label={}];", Value::from(l.as_str()));
    }
    for p in 0..x.points() {
        let above = t.minimal_open(p) & !(1 << p);
        for q in members(above) {
            let between = members(above).any(|z| z != q && t.minimal_open(z) >> q & 1 == 1);
            if !between {
                let _ = writeln!(out, "  p{q} -> p{p};");
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Nerve report: per-object value counts and the sheaf condition on each designated cover.
pub fn nerve_report(site: &Site, site_name: &str, table: &NerveTable, covers: &[CoverCheck]) -> String {
    let counts: Map<String, Value> =
        site.objects().iter().zip(table.counts()).map(|(o, c)| (o.name.clone(), Value::from(c))).collect();
    let holds = covers.iter().all(|c| c.holds);
    let v = json!({
        "context": site.context(),
        "site": {
            "name": site_name,
            "objects": site.objects().iter().map(|o| o.name.as_str()).collect::<Vec<_>>(),
            "homs": site.homs().len(),
            "covers": site.covers().len(),
        },
        "counts": counts,
        "functorial": table.is_functorial(site),
        "sheaf_condition": if holds { "PASS" } else { "FAIL" },
        "covers": covers,
        "scope": "finite site only",
    });
    serde_json::to_string_pretty(&v).expect("serializable") + "\n"
}

/// Writes `contents` to `dir/name`, creating `dir`.
pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Input(format!("{}: {e}", dir.display())))?;
    let p = dir.join(name);
    std::fs::write(&p, contents).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
    Ok(p)
}
