use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mpisp_bench::instance;
use mpisp_core::search::{init_once, local_search, SearchState};
use mpisp_core::solution::{Problem, Scoring};
use mpisp_core::{tabu_search, SearchConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("init_once");
    for n in [25, 50, 100] {
        let p = Problem::new(instance(n, 3, 7, 4));
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            b.iter(|| init_once(p, Scoring::default(), 2.0, &mut rng))
        });
    }
    group.finish();
}

fn descent(c: &mut Criterion) {
    let mut group = c.benchmark_group("local_search");
    group.sample_size(20);
    for n in [25, 50, 100] {
        let p = Problem::new(instance(n, 3, 7, 6));
        let start = init_once(&p, Scoring::default(), 2.0, &mut ChaCha8Rng::seed_from_u64(7));
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| {
                let mut state = SearchState::new(p, 10);
                local_search(p, start.clone(), &mut state, 20)
            })
        });
    }
    group.finish();
}

fn full_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("tabu_search");
    group.sample_size(10);
    let p = Problem::new(instance(50, 3, 7, 8));
    let cfg = SearchConfig { n_init: 10, max_perturbation: 3, ..SearchConfig::default() };
    group.bench_function("n50_w3", |b| b.iter(|| tabu_search(&p, &cfg)));
    group.finish();
}

criterion_group!(benches, construction, descent, full_run);
criterion_main!(benches);
