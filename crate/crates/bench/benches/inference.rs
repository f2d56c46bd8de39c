use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use factorgm::{
    AlphaExpansion, BeliefPropagation, BpParameters, Gibbs, GibbsParameters, Icm, Inference,
    LazyFlipper, MoveParameters, Oracle, SearchParameters,
};
use factorgm_bench::{grid, small_model};

fn message_passing(c: &mut Criterion) {
    let mut group = c.benchmark_group("bp");
    for side in [8, 16, 32] {
        let m = grid(side, side, 4, 1);
        group.bench_with_input(BenchmarkId::from_parameter(side), &m, |b, m| {
            b.iter(|| {
                BeliefPropagation::new(m, BpParameters::new(20, 0.0, 0.5))
                    .unwrap()
                    .infer()
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn move_making(c: &mut Criterion) {
    let mut group = c.benchmark_group("moves");
    let m = grid(24, 24, 5, 2);
    group.bench_function("alphaexp", |b| {
        b.iter(|| {
            AlphaExpansion::new(&m, MoveParameters::default())
                .unwrap()
                .infer()
                .unwrap()
        })
    });
    group.bench_function("icm", |b| {
        b.iter(|| {
            Icm::new(&m, SearchParameters::default())
                .unwrap()
                .infer()
                .unwrap()
        })
    });
    group.bench_function("lazyflipper", |b| {
        b.iter(|| {
            LazyFlipper::new(&m, SearchParameters::default())
                .unwrap()
                .infer()
                .unwrap()
        })
    });
    group.finish();
}

fn enumeration_and_sampling(c: &mut Criterion) {
    let m = small_model(3);
    c.bench_function("oracle", |b| b.iter(|| Oracle::new(&m).solve().unwrap()));
    let p = grid(8, 8, 3, 4).boltzmann().unwrap();
    c.bench_function("gibbs", |b| {
        b.iter(|| {
            Gibbs::new(&p, GibbsParameters::new(20_000, 1_000, 5))
                .unwrap()
                .infer()
                .unwrap()
        })
    });
}

criterion_group!(
    benches,
    message_passing,
    move_making,
    enumeration_and_sampling
);
criterion_main!(benches);
