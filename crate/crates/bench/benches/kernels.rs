use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sfp_bench::rough_instance;
use sfp_core::besov::norm;
use sfp_core::particles::{interaction_density, kde_density, InteractionMode, ParticleEnsemble};
use sfp_core::solver::{solve_picard, Nonlinearity, SolverParams};
use sfp_core::spectral::{heat_semigroup, pointwise_product};
use sfp_core::{DriftField, TimeGrid};

fn spectral(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectral");
    for n in [256, 1024, 4096] {
        let (v0, b) = rough_instance(n, 1);
        g.bench_with_input(BenchmarkId::new("heat_semigroup", n), &v0, |bench, v| {
            bench.iter(|| heat_semigroup(v, 0.01).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("dealiased_product", n), &(v0, b), |bench, (v, b)| {
            bench.iter(|| pointwise_product(v, b.profile()).unwrap())
        });
    }
    g.finish();
}

fn besov(c: &mut Criterion) {
    let mut g = c.benchmark_group("besov");
    for n in [256, 1024, 4096] {
        let (_, b) = rough_instance(n, 2);
        g.bench_with_input(BenchmarkId::new("norm", n), b.profile(), |bench, f| bench.iter(|| norm(f, -0.25).unwrap()));
    }
    g.finish();
}

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("solver");
    g.sample_size(10);
    let (v0, b) = rough_instance(256, 3);
    let p = SolverParams::new(0.35, 0.25, TimeGrid::new(0.25, 100).unwrap()).unwrap();
    g.bench_function("picard_n256_m100", |bench| {
        bench.iter(|| solve_picard(&v0, &b, Nonlinearity::Arctan, &p).unwrap())
    });
    g.finish();
}

fn particles(c: &mut Criterion) {
    let mut g = c.benchmark_group("particles");
    g.sample_size(10);
    let (v0, _) = rough_instance(512, 4);
    let big = ParticleEnsemble::sample(&v0, 100_000, 5).unwrap();
    g.bench_function("kde_1e5", |bench| bench.iter(|| kde_density(&big, 0.075).unwrap()));
    let mid = ParticleEnsemble::sample(&v0, 5_000, 6).unwrap();
    for mode in [InteractionMode::Direct, InteractionMode::Spectral] {
        g.bench_function(format!("interaction_5000_{mode:?}").to_lowercase(), |bench| {
            bench.iter(|| interaction_density(&mid, 0.05, mode).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, spectral, besov, solver, particles);
criterion_main!(benches);
