use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fluor_bench::doubly_dressed;
use fluor_core::correlation::{stationary_spectrum, SpectrumPlan};
use fluor_core::hilbert::build_operators;
use fluor_core::lindblad::{build_system, evolve, steady_state, uniform_grid, DensityMatrix, EvolveOptions};

fn steady(c: &mut Criterion) {
    let mut g = c.benchmark_group("steady_state");
    for n in [6, 12, 24] {
        let spec = doubly_dressed(n);
        let l = build_system(&spec).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| steady_state(black_box(&l), spec.hilbert).unwrap())
        });
    }
    g.finish();
}

fn spectrum(c: &mut Criterion) {
    let spec = doubly_dressed(12);
    let plan = SpectrumPlan::default();
    let mut g = c.benchmark_group("spectrum");
    g.sample_size(10);
    g.bench_function("stationary_nc12", |b| b.iter(|| stationary_spectrum(black_box(&spec), &plan).unwrap()));
    g.finish();
}

fn ode(c: &mut Criterion) {
    let spec = doubly_dressed(12);
    let l = build_system(&spec).unwrap();
    let ops = build_operators(spec.hilbert).unwrap();
    let rho0 = DensityMatrix::ground(spec.hilbert);
    let grid = uniform_grid(0.0, 1.0, 0.002).unwrap();
    let mut g = c.benchmark_group("ode");
    g.sample_size(10);
    g.bench_function("evolve_1us_nc12", |b| {
        b.iter(|| evolve(&l, black_box(&rho0), &grid, &[("sigma_z", &ops.sigma_z)], &EvolveOptions::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, steady, spectrum, ode);
criterion_main!(benches);
