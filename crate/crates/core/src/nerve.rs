//! Functors of points on a finite test site.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{homs, pushout, FiniteAlgebra, Hom, DEFAULT_SIZE_BOUND};
use crate::context::SpectralContext;
use crate::corpus;
use crate::error::{Error, Result};
use crate::hypercover::{opcovers, Opcover};
use crate::spectrum::{ap_maps, build_spec, spec_map, APMap, MapKey, SpectralSpace};

const MAX_TRANSFORMATIONS: usize = 1 << 16;

#[derive(Clone, Debug)]
pub struct SiteObject {
    pub name: String,
    pub algebra: Arc<FiniteAlgebra>,
    pub spec: Arc<SpectralSpace>,
}

#[derive(Clone, Debug)]
pub struct SiteHom {
    pub from: usize,
    pub to: usize,
    pub hom: Hom,
    /// `Spec to → Spec from`.
    pub pullback: APMap,
}

/// Test algebras, every hom between them, and designated covers of each.
#[derive(Clone, Debug)]
pub struct Site {
    context: SpectralContext,
    objects: Vec<SiteObject>,
    homs: Vec<SiteHom>,
    index: HashMap<(usize, usize, Vec<usize>), usize>,
    covers: Vec<(usize, Opcover)>,
}

impl Site {
    pub fn new(context: SpectralContext, objects: Vec<(String, Arc<FiniteAlgebra>)>) -> Result<Self> {
        let objects = objects
            .into_iter()
            .map(|(name, algebra)| {
                context.check_algebra(&algebra)?;
                let spec = Arc::new(build_spec(context, &algebra)?);
                Ok(SiteObject { name, algebra, spec })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut hs = Vec::new();
        let mut index = HashMap::new();
        for (a, s) in objects.iter().enumerate() {
            for (b, t) in objects.iter().enumerate() {
                for h in homs(&s.algebra, &t.algebra) {
                    let pullback = spec_map(&t.spec, &s.spec, &h)?;
                    index.insert((a, b, h.map()), hs.len());
                    hs.push(SiteHom { from: a, to: b, hom: h, pullback });
                }
            }
        }
        let mut covers = Vec::new();
        for (a, s) in objects.iter().enumerate() {
            for c in opcovers(context, &s.algebra, 2)? {
                covers.push((a, c));
            }
        }
        Ok(Site { context, objects, homs: hs, index, covers })
    }

    /// Corpus algebras of the context's kind with at most `max` elements.
    pub fn corpus(context: SpectralContext, max: usize) -> Result<Self> {
        let list = match context {
            SpectralContext::Deitmar => corpus::monoid_corpus(),
            _ => corpus::ring_corpus(),
        };
        Site::new(context, list.into_iter().filter(|(_, a)| a.len() <= max).map(|(n, a)| (n, Arc::new(a))).collect())
    }

    /// All corpus algebras with at most 8 elements.
    pub fn default_for(context: SpectralContext) -> Result<Self> {
        Site::corpus(context, 8)
    }

    pub fn context(&self) -> SpectralContext {
        self.context
    }

    pub fn objects(&self) -> &[SiteObject] {
        &self.objects
    }

    pub fn homs(&self) -> &[SiteHom] {
        &self.homs
    }

    pub fn covers(&self) -> &[(usize, Opcover)] {
        &self.covers
    }

    pub fn hom_index(&self, from: usize, to: usize, h: &Hom) -> Option<usize> {
        self.index.get(&(from, to, h.map())).copied()
    }

    pub fn homs_between(&self, from: usize, to: usize) -> impl Iterator<Item = (usize, &SiteHom)> {
        self.homs.iter().enumerate().filter(move |(_, h)| h.from == from && h.to == to)
    }
}

/// `NX(S)` for each site object, with the action of each site hom.
#[derive(Clone, Debug)]
pub struct NerveTable {
    values: Vec<Vec<APMap>>,
    index: Vec<HashMap<MapKey, usize>>,
    action: Vec<Vec<usize>>,
}

impl NerveTable {
    pub fn values(&self, s: usize) -> &[APMap] {
        &self.values[s]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.values.iter().map(Vec::len).collect()
    }

    pub fn lookup(&self, s: usize, m: &APMap) -> Option<usize> {
        self.index[s].get(&m.key()).copied()
    }

    /// Image of the `m`-th element of `NX(from)` under site hom `h`.
    pub fn act(&self, h: usize, m: usize) -> usize {
        self.action[h][m]
    }

    /// Identities act trivially and composites act by composition.
    pub fn is_functorial(&self, site: &Site) -> bool {
        for (hi, h) in site.homs.iter().enumerate() {
            if h.from == h.to
                && h.hom.map().iter().enumerate().all(|(a, &b)| a == b)
                && self.action[hi].iter().enumerate().any(|(a, &b)| a != b)
            {
                return false;
            }
        }
        for (fi, f) in site.homs.iter().enumerate() {
            for (gi, g) in site.homs.iter().enumerate().filter(|(_, g)| g.from == f.to) {
                let Ok(gf) = f.hom.then(&g.hom) else { return false };
                let Some(c) = site.hom_index(f.from, g.to, &gf) else { return false };
                if (0..self.values[f.from].len()).any(|m| self.action[c][m] != self.action[gi][self.action[fi][m]]) {
                    return false;
                }
            }
        }
        true
    }
}

fn restrict_all(values: &[APMap], pullback: &APMap, into: &HashMap<MapKey, usize>) -> Result<Vec<usize>> {
    values
        .iter()
        .map(|m| {
            into.get(&pullback.then_unchecked(m).key())
                .copied()
                .ok_or_else(|| Error::InvariantViolation("restricted map is not among the enumerated ones".into()))
        })
        .collect()
}

fn keyed(values: &[APMap]) -> HashMap<MapKey, usize> {
    values.iter().enumerate().map(|(i, m)| (m.key(), i)).collect()
}

pub fn nerve(x: &Arc<SpectralSpace>, site: &Site) -> Result<NerveTable> {
    if x.context() != site.context {
        return Err(Error::KindMismatch("space and site live in different contexts".into()));
    }
    let values: Vec<Vec<APMap>> = site.objects.iter().map(|o| ap_maps(&o.spec, x)).collect::<Result<_>>()?;
    let index: Vec<HashMap<MapKey, usize>> = values.iter().map(|v| keyed(v)).collect();
    let action =
        site.homs.iter().map(|h| restrict_all(&values[h.from], &h.pullback, &index[h.to])).collect::<Result<_>>()?;
    Ok(NerveTable { values, index, action })
}

/// Outcome of the sheaf condition for one designated cover.
#[derive(Clone, Debug, Serialize)]
pub struct CoverCheck {
    pub object: String,
    pub components: usize,
    pub sections: usize,
    pub families: usize,
    /// `NX(S) → Π NX(K_i)` has image of size `sections`.
    pub injective: bool,
    pub holds: bool,
}

/// Sheaf condition for `NX` on every designated cover: `NX(S)` is the equalizer of
/// `Π NX(K_i) ⇉ Π NX(K_i ⊗ K_j)`.
pub fn sheaf_condition(x: &Arc<SpectralSpace>, site: &Site, table: &NerveTable) -> Result<Vec<CoverCheck>> {
    let ctx = site.context;
    let mut out = Vec::new();
    for (s, cover) in &site.covers {
        let obj = &site.objects[*s];
        let comps = cover.components();
        let specs: Vec<Arc<SpectralSpace>> =
            comps.iter().map(|k| build_spec(ctx, k.target()).map(Arc::new)).collect::<Result<_>>()?;
        let vals: Vec<Vec<APMap>> = specs.iter().map(|sp| ap_maps(sp, x)).collect::<Result<_>>()?;
        let idx: Vec<HashMap<MapKey, usize>> = vals.iter().map(|v| keyed(v)).collect();
        let restrict: Vec<Vec<usize>> = comps
            .iter()
            .zip(&specs)
            .zip(&idx)
            .map(|((k, sp), ix)| restrict_all(&table.values[*s], &spec_map(sp, &obj.spec, k.map())?, ix))
            .collect::<Result<_>>()?;
        // overlaps: the two restrictions into NX(K_i ⊗ K_j)
        let mut overlaps: Vec<(usize, usize, Vec<usize>, Vec<usize>)> = Vec::new();
        for i in 0..comps.len() {
            for j in i + 1..comps.len() {
                let po = pushout(comps[i].map(), comps[j].map(), DEFAULT_SIZE_BOUND)?;
                let sp = Arc::new(build_spec(ctx, &po.apex)?);
                let v = ap_maps(&sp, x)?;
                let ix = keyed(&v);
                let left = restrict_all(&vals[i], &spec_map(&sp, &specs[i], &po.left)?, &ix)?;
                let right = restrict_all(&vals[j], &spec_map(&sp, &specs[j], &po.right)?, &ix)?;
                overlaps.push((i, j, left, right));
            }
        }
        let mut families: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut cur = vec![0usize; comps.len()];
        fn rec(
            i: usize,
            vals: &[Vec<APMap>],
            overlaps: &[(usize, usize, Vec<usize>, Vec<usize>)],
            cur: &mut Vec<usize>,
            out: &mut BTreeSet<Vec<usize>>,
        ) {
            if i == vals.len() {
                out.insert(cur.clone());
                return;
            }
            'm: for m in 0..vals[i].len() {
                cur[i] = m;
                for (a, b, l, r) in overlaps {
                    if *b == i && l[cur[*a]] != r[m] {
                        continue 'm;
                    }
                }
                rec(i + 1, vals, overlaps, cur, out);
            }
        }
        rec(0, &vals, &overlaps, &mut cur, &mut families);
        // image factorization of NX(S) → Π NX(K_i)
        let n = table.values[*s].len();
        let image: BTreeSet<Vec<usize>> = (0..n).map(|m| restrict.iter().map(|r| r[m]).collect()).collect();
        out.push(CoverCheck {
            object: obj.name.clone(),
            components: comps.len(),
            sections: n,
            families: families.len(),
            injective: image.len() == n,
            holds: image.len() == n && image == families,
        });
    }
    Ok(out)
}

/// `N(Spec R)` against `yR = Hom(R, −)`.
#[derive(Clone, Debug, Serialize)]
pub struct Representability {
    /// Per site object: `|Hom(R, S)|`, `|N(Spec R)(S)|` and whether `f ↦ Spec f` is a bijection.
    pub per_object: Vec<(String, usize, usize, bool)>,
    pub natural: bool,
}

impl Representability {
    pub fn holds(&self) -> bool {
        self.natural && self.per_object.iter().all(|o| o.3)
    }
}

pub fn compare_with_representable(r: &Arc<FiniteAlgebra>, site: &Site) -> Result<Representability> {
    let x = Arc::new(build_spec(site.context, r)?);
    let table = nerve(&x, site)?;
    let mut per_object = Vec::new();
    let mut idx: Vec<Vec<usize>> = Vec::new();
    for (s, o) in site.objects.iter().enumerate() {
        let hs = homs(r, &o.algebra);
        let ix: Vec<Option<usize>> =
            hs.iter().map(|f| spec_map(&o.spec, &x, f).map(|m| table.lookup(s, &m))).collect::<Result<_>>()?;
        let hit: BTreeSet<usize> = ix.iter().flatten().copied().collect();
        let bijective = ix.iter().all(Option::is_some) && hit.len() == hs.len() && hit.len() == table.values[s].len();
        per_object.push((o.name.clone(), hs.len(), table.values[s].len(), bijective));
        idx.push(ix.into_iter().map(|i| i.unwrap_or(usize::MAX)).collect());
    }
    let mut natural = true;
    for (hi, h) in site.homs.iter().enumerate() {
        let hs = homs(r, &site.objects[h.from].algebra);
        let targets = homs(r, &site.objects[h.to].algebra);
        let pos: HashMap<Vec<usize>, usize> = targets.iter().enumerate().map(|(i, f)| (f.map(), i)).collect();
        for (fi, f) in hs.iter().enumerate() {
            let gf = f.then(&h.hom)?;
            let Some(&t) = pos.get(&gf.map()) else {
                natural = false;
                continue;
            };
            let m = idx[h.from][fi];
            if m == usize::MAX || idx[h.to][t] != table.action[hi][m] {
                natural = false;
            }
        }
    }
    Ok(Representability { per_object, natural })
}

/// `yR_U`: homs `f : R → S` such that every point of `Spec S` lands in `U` under `Spec f`.
#[derive(Clone, Debug)]
pub struct OpenSubfunctor {
    pub base: Arc<FiniteAlgebra>,
    pub open: u64,
    pub values: Vec<Vec<Hom>>,
}

pub fn open_subfunctor(r: &Arc<FiniteAlgebra>, open: u64, site: &Site) -> Result<OpenSubfunctor> {
    let x = Arc::new(build_spec(site.context, r)?);
    if !x.topology().is_open(open) {
        return Err(Error::Input("not an open of Spec R".into()));
    }
    let mut values = Vec::new();
    for o in &site.objects {
        let mut v = Vec::new();
        for f in homs(r, &o.algebra) {
            let m = spec_map(&o.spec, &x, &f)?;
            if m.points().iter().all(|&p| open >> p & 1 == 1) {
                v.push(f);
            }
        }
        values.push(v);
    }
    Ok(OpenSubfunctor { base: r.clone(), open, values })
}

impl OpenSubfunctor {
    /// Whether `g ↦ g ∘ k` is a bijection `Hom(K, S) → yR_U(S)` at every site object.
    pub fn represented_by(&self, k: &crate::context::Localization, site: &Site) -> bool {
        site.objects.iter().zip(&self.values).all(|(o, v)| {
            let here: BTreeSet<Vec<usize>> = v.iter().map(Hom::map).collect();
            let from_k: Vec<Vec<usize>> =
                homs(k.target(), &o.algebra).iter().map(|g| k.map().then(g).expect("composable").map()).collect();
            let distinct: BTreeSet<Vec<usize>> = from_k.iter().cloned().collect();
            distinct.len() == from_k.len() && distinct == here
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub site_objects: Vec<String>,
    pub maps: usize,
    pub transformations: usize,
    /// The transformation count hit the enumeration cap.
    pub capped: bool,
    pub injective: bool,
    pub bijective: bool,
    pub covers_checked: usize,
    pub covers_injective: bool,
}

/// Natural transformations `NX → NY` on the site, by backtracking with propagation along
/// site homs. Stops after `cap` solutions.
pub fn natural_transformations(site: &Site, nx: &NerveTable, ny: &NerveTable, cap: usize) -> Vec<Vec<Vec<usize>>> {
    let vars: Vec<(usize, usize)> =
        (0..site.objects.len()).flat_map(|s| (0..nx.values[s].len()).map(move |m| (s, m))).collect();
    let mut eta: Vec<Vec<Option<usize>>> = nx.values.iter().map(|v| vec![None; v.len()]).collect();
    let out_homs: Vec<Vec<usize>> = (0..site.objects.len())
        .map(|s| site.homs.iter().enumerate().filter(|(_, h)| h.from == s).map(|(i, _)| i).collect())
        .collect();
    let mut found = Vec::new();

    fn assign(
        s: usize,
        m: usize,
        v: usize,
        site: &Site,
        nx: &NerveTable,
        ny: &NerveTable,
        out_homs: &[Vec<usize>],
        eta: &mut Vec<Vec<Option<usize>>>,
        trail: &mut Vec<(usize, usize)>,
    ) -> bool {
        let mut stack = vec![(s, m, v)];
        while let Some((s, m, v)) = stack.pop() {
            match eta[s][m] {
                Some(w) if w != v => return false,
                Some(_) => continue,
                None => {
                    eta[s][m] = Some(v);
                    trail.push((s, m));
                }
            }
            for &h in &out_homs[s] {
                let t = site.homs[h].to;
                stack.push((t, nx.action[h][m], ny.action[h][v]));
            }
        }
        true
    }

    fn rec(
        i: usize,
        vars: &[(usize, usize)],
        site: &Site,
        nx: &NerveTable,
        ny: &NerveTable,
        out_homs: &[Vec<usize>],
        eta: &mut Vec<Vec<Option<usize>>>,
        found: &mut Vec<Vec<Vec<usize>>>,
        cap: usize,
    ) {
        if found.len() >= cap {
            return;
        }
        let Some(k) = (i..vars.len()).find(|&k| eta[vars[k].0][vars[k].1].is_none()) else {
            found.push(eta.iter().map(|row| row.iter().map(|v| v.unwrap()).collect()).collect());
            return;
        };
        let (s, m) = vars[k];
        for v in 0..ny.values[s].len() {
            let mut trail = Vec::new();
            if assign(s, m, v, site, nx, ny, out_homs, eta, &mut trail) {
                rec(k + 1, vars, site, nx, ny, out_homs, eta, found, cap);
            }
            for (a, b) in trail {
                eta[a][b] = None;
            }
        }
    }

    rec(0, &vars, site, nx, ny, &out_homs, &mut eta, &mut found, cap);
    found
}

/// Compares maps `X → Y` with natural transformations `NX → NY` on the site.
pub fn scheme_equivalence_probe(x: &Arc<SpectralSpace>, y: &Arc<SpectralSpace>, site: &Site) -> Result<ProbeReport> {
    let nx = nerve(x, site)?;
    let ny = nerve(y, site)?;
    let maps = ap_maps(x, y)?;
    let nats = natural_transformations(site, &nx, &ny, MAX_TRANSFORMATIONS);
    let pos: HashMap<&Vec<Vec<usize>>, usize> = nats.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let mut hit = BTreeSet::new();
    let mut injective = true;
    for a in &maps {
        let eta: Vec<Vec<usize>> = (0..site.objects.len())
            .map(|s| {
                nx.values[s]
                    .iter()
                    .map(|m| {
                        ny.lookup(s, &m.then_unchecked(a))
                            .ok_or_else(|| Error::InvariantViolation("composite not enumerated".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        match pos.get(&eta) {
            Some(&i) => injective &= hit.insert(i),
            None => return Err(Error::InvariantViolation("composition is not natural".into())),
        }
    }
    let capped = nats.len() >= MAX_TRANSFORMATIONS;
    let covers = sheaf_condition(x, site, &nx)?;
    Ok(ProbeReport {
        site_objects: site.objects.iter().map(|o| o.name.clone()).collect(),
        maps: maps.len(),
        transformations: nats.len(),
        capped,
        injective,
        bijective: injective && !capped && hit.len() == nats.len(),
        covers_checked: covers.len(),
        covers_injective: covers.iter().all(|c| c.injective),
    })
}
