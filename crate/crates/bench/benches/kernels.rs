use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use slitsic::sicsearch::{
    balance_solution, build_povm, objective_gradient, reference_solution, refine,
    tetra_objective, DEFAULT_DELTA_XI,
};
use slitsic::tomo::{
    ideal_probabilities, mle_reconstruct, simulate_counts, simulate_counts_multinomial,
    MLE_MAX_ITERS, MLE_TOL,
};
use slitsic::wavefield::{default_grid, fresnel_propagate_to};
use slitsic::{BlochState, CountRecord, DetectorLayout, SampledField, SlitConfig};

fn objective(c: &mut Criterion) {
    let (zeta, w) = (3.4678, [-1.0287, -0.268044, 0.268044, 1.0287]);
    c.bench_function("tetra_objective", |b| {
        b.iter(|| tetra_objective(black_box(zeta), black_box(&w)))
    });
    c.bench_function("objective_gradient", |b| {
        b.iter(|| objective_gradient(black_box(zeta), black_box(&w)))
    });
    c.bench_function("refine_from_perturbed_start", |b| {
        b.iter(|| refine(black_box([3.3, -1.1, -0.2, 0.3, 1.0]), 1e-12, 300, 200))
    });
}

fn fresnel(c: &mut Criterion) {
    let cfg = SlitConfig::new(2.76444).unwrap();
    let zeta = 3.4678;
    let input = SampledField::mode(1, 0.0, &cfg, default_grid(0.0, &cfg)).unwrap();
    let out = default_grid(zeta, &cfg);
    let mut group = c.benchmark_group("fresnel");
    group.sample_size(10);
    group.bench_function("default_grid", |b| {
        b.iter(|| fresnel_propagate_to(black_box(&input), zeta, out.clone()).unwrap())
    });
    group.finish();
}

fn tomography(c: &mut Criterion) {
    let sol = reference_solution();
    let delta = balance_solution(&sol).unwrap();
    let layout = DetectorLayout::from_solution(&sol, delta, DEFAULT_DELTA_XI).unwrap();
    let povm = build_povm(&sol, delta, DEFAULT_DELTA_XI).unwrap();
    let rho = BlochState::new([0.3, -0.2, 0.5]).unwrap();

    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    group.bench_function("photons_1e6", |b| {
        b.iter(|| simulate_counts(&rho, &layout, black_box(1_000_000), 3).unwrap())
    });
    group.bench_function("multinomial_1e9", |b| {
        b.iter(|| simulate_counts_multinomial(&rho, &layout, black_box(1_000_000_000), 3).unwrap())
    });
    group.finish();

    let p = ideal_probabilities(&rho, &povm);
    let n = p.map(|v| (v * 1e6).round() as u64);
    let counts = CountRecord {
        n,
        n_discarded: 0,
        n_total: n.iter().sum(),
    };
    c.bench_function("mle_reconstruct", |b| {
        b.iter(|| mle_reconstruct(black_box(&counts), &povm, MLE_MAX_ITERS, MLE_TOL).unwrap())
    });
}

criterion_group!(benches, objective, fresnel, tomography);
criterion_main!(benches);
