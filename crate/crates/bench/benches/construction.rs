use bellmd_core::random::random_chsh_ns_behavior;
use bellmd_core::{
    catalog_chained, catalog_chsh, enumerate_local_vertices, local_mimic, simulate, source_polytope_vertices,
    strategy_theorem1, Rational, Scalar, ScenarioShape,
};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn vertices(c: &mut Criterion) {
    for m in [2, 3, 4] {
        let shape = ScenarioShape::uniform(2, m, 2).unwrap();
        c.bench_function(&format!("local_vertices/2x{m}"), |b| {
            b.iter(|| enumerate_local_vertices(black_box(&shape)).unwrap())
        });
    }
    let bound = Rational::from_ratio(27, 100);
    c.bench_function("source_vertices/n16", |b| {
        b.iter(|| source_polytope_vertices(16, black_box(&bound)).unwrap())
    });
}

fn mimic(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    c.bench_function("local_mimic/chsh", |b| {
        b.iter_batched(
            || random_chsh_ns_behavior(&mut rng),
            |p| local_mimic(&p, &[0, 0]).unwrap(),
            BatchSize::SmallInput,
        )
    });
    let f = catalog_chained::<Rational>(4).unwrap();
    c.bench_function("strategy_theorem1/chained4", |b| {
        b.iter(|| strategy_theorem1(f.shape(), Some(&f)).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let f = catalog_chsh::<Rational>();
    let s = strategy_theorem1(f.shape(), Some(&f)).unwrap();
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    group.bench_function("chsh_1e6", |b| b.iter(|| simulate(&s, &f, 1_000_000, 1).unwrap()));
    group.finish();
}

criterion_group!(benches, vertices, mimic, simulation);
criterion_main!(benches);
