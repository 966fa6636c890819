use criterion::{black_box, criterion_group, criterion_main, Criterion};

use conespec::algebra::{find_isomorphism, pushout, DEFAULT_SIZE_BOUND};
use conespec::hypercover::{h0, kernel_hyperopcover, Opcover};
use conespec::nerve::{nerve, sheaf_condition, Site};
use conespec::reduction::{is_geometric_iso, red};
use conespec::spectrum::build_spec;
use conespec::SpectralContext::{Deitmar, Domain, Zariski};
use conespec_bench::{doubled, named};

fn algebra(c: &mut Criterion) {
    let a = named(Zariski, "Z/2xZ/3xZ/3");
    let b = named(Zariski, "F2[x]/(x^2)xF3");
    c.bench_function("iso Z/2xZ/3xZ/3", |t| t.iter(|| find_isomorphism(black_box(&a), black_box(&a))));
    c.bench_function("iso miss at order 12", |t| {
        t.iter(|| find_isomorphism(black_box(&b), black_box(&named(Zariski, "Z/12"))))
    });
    let k = Zariski.local_forms(&a).unwrap();
    c.bench_function("pushout of two local forms", |t| {
        t.iter(|| pushout(k[0].map(), k[1].map(), DEFAULT_SIZE_BOUND).unwrap())
    });
}

fn context(c: &mut Criterion) {
    for (ctx, name) in [(Zariski, "F2xF2xF2"), (Domain, "F2[x,y]/(x,y)^2"), (Deitmar, "(Z/12,*)")] {
        let r = named(ctx, name);
        c.bench_function(&format!("local forms {ctx} {name}"), |t| t.iter(|| ctx.local_forms(black_box(&r)).unwrap()));
        c.bench_function(&format!("saturation {ctx} {name}"), |t| {
            t.iter(|| ctx.saturate_bounded(black_box(&r), r.len() + 2).unwrap())
        });
    }
}

fn spectrum(c: &mut Criterion) {
    for (ctx, name) in [(Zariski, "Z/12"), (Zariski, "F2xF4"), (Domain, "Z/8"), (Deitmar, "{1,e}^2")] {
        let r = named(ctx, name);
        c.bench_function(&format!("spec {ctx} {name}"), |t| t.iter(|| build_spec(ctx, black_box(&r)).unwrap()));
    }
    let r = named(Domain, "F2[x]/(x^3)");
    c.bench_function("red domain F2[x]/(x^3)", |t| t.iter(|| red(Domain, black_box(&r)).unwrap()));
    let u = red(Domain, &r).unwrap();
    c.bench_function("geometric iso of red unit", |t| t.iter(|| is_geometric_iso(Domain, black_box(&u)).unwrap()));
}

fn hypercover(c: &mut Criterion) {
    let r = named(Zariski, "Z/2xZ/3xZ/3");
    let cover = Opcover::finest(Zariski, &r).unwrap();
    c.bench_function("cech H0 of finest cover", |t| {
        t.iter(|| h0(&kernel_hyperopcover(Zariski, black_box(cover.clone())).unwrap()).unwrap())
    });
}

fn glue_nerve(c: &mut Criterion) {
    c.bench_function("glue doubled Z/6", |t| t.iter(|| doubled(Zariski, "Z/6")));
    let site = Site::default_for(Deitmar).unwrap();
    let p1 = doubled(Deitmar, "{1,e}").space;
    c.bench_function("nerve of P1 on the deitmar site", |t| t.iter(|| nerve(black_box(&p1), &site).unwrap()));
    let table = nerve(&p1, &site).unwrap();
    c.bench_function("sheaf condition of P1", |t| t.iter(|| sheaf_condition(&p1, &site, black_box(&table)).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = algebra, context, spectrum, hypercover, glue_nerve
}
criterion_main!(benches);
