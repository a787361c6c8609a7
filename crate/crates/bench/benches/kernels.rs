use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polarlab::dynamics::degroot_step;
use polarlab::metrics::local_agreement;
use polarlab::spectral::top_eigenpairs;
use polarlab::EigenOptions;
use polarlab_bench::{geometric, opinions, sbm5};

fn bench_degroot_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("degroot_step");
    for n in [1000, 4000] {
        let g = sbm5(n);
        let z = opinions(&g);
        group.bench_with_input(BenchmarkId::new("sbm5", n), &n, |b, _| {
            b.iter(|| degroot_step(black_box(&g), black_box(&z)).unwrap())
        });
    }
    group.finish();
}

fn bench_top_eigenpairs(c: &mut Criterion) {
    let mut group = c.benchmark_group("top_eigenpairs");
    group.sample_size(10);
    let opts = EigenOptions::default();
    for (name, g) in [("sbm5", sbm5(1000)), ("geometric", geometric(1000))] {
        group.bench_function(BenchmarkId::new(name, 1000), |b| {
            b.iter(|| top_eigenpairs(black_box(&g), 3, &opts).unwrap())
        });
    }
    group.finish();
}

fn bench_local_agreement(c: &mut Criterion) {
    let g = sbm5(1000);
    let z = opinions(&g);
    c.bench_function("local_agreement/sbm5/1000", |b| {
        b.iter(|| local_agreement(black_box(&g), black_box(&z)).unwrap())
    });
}

criterion_group!(benches, bench_degroot_step, bench_top_eigenpairs, bench_local_agreement);
criterion_main!(benches);
