use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mpisp_bench::instance;
use mpisp_core::TransitTables;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("transit_build");
    for n in [25, 50, 100] {
        let inst = instance(n, 3, 7, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| b.iter(|| TransitTables::new(black_box(inst))));
    }
    group.finish();
}

fn query(c: &mut Criterion) {
    let mut group = c.benchmark_group("transit_query");
    for w in [1, 3, 5] {
        let inst = instance(100, w, 7, 2);
        let tt = TransitTables::new(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let queries: Vec<(usize, usize, f64)> = (0..4096)
            .map(|_| (rng.gen_range(0..=100), rng.gen_range(0..=100), rng.gen_range(0.0..inst.horizon())))
            .collect();
        group.bench_function(BenchmarkId::from_parameter(w), |b| {
            b.iter(|| queries.iter().map(|&(i, j, dt)| tt.transit(i, j, dt)).fold(0.0, |a, t| a + t.min(1e9)))
        });
    }
    group.finish();
}

criterion_group!(benches, build, query);
criterion_main!(benches);
