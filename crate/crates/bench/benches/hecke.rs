use brandt_bench::{context, BRANDT_CASES, CLASS_CASES};
use brandt_core::{char_poly, class_set, BrandtContext, ClassOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn classes(c: &mut Criterion) {
    let mut group = c.benchmark_group("class_set");
    group.sample_size(10);
    let opts = ClassOptions::default();
    for &(g, p) in CLASS_CASES {
        group.bench_with_input(BenchmarkId::new(format!("g{g}"), p), &p, |b, &p| {
            b.iter(|| class_set(g, p, &opts).unwrap())
        });
    }
    group.finish();
}

fn brandt(c: &mut Criterion) {
    let mut group = c.benchmark_group("brandt");
    group.sample_size(10);
    for &(g, p, n) in BRANDT_CASES {
        let set = context(g, p).class_set().clone();
        group.bench_function(BenchmarkId::new(format!("g{g}-p{p}"), n), |b| {
            // a fresh context each iteration so the memo table is cold
            b.iter(|| BrandtContext::new(set.clone()).unwrap().brandt(n).unwrap())
        });
    }
    group.finish();
}

fn charpoly(c: &mut Criterion) {
    let mut group = c.benchmark_group("char_poly");
    for &(g, p, n) in BRANDT_CASES {
        let m = context(g, p).brandt(n).unwrap();
        group.bench_function(BenchmarkId::new(format!("g{g}-p{p}-n{n}"), m.h), |b| b.iter(|| char_poly(&m.entries)));
    }
    group.finish();
}

criterion_group!(benches, classes, brandt, charpoly);
criterion_main!(benches);
