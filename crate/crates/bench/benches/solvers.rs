use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use decoherence_core::{
    coefficients_integral, embed_ecs, integrate_master, markov_shift, solve_modes, states::concurrence_from_modes,
    Complex64, EcsKind, EcsState, FockSpace, PhaseBranch, SpectralParams, SystemParams, TimeGrid,
};

fn env() -> SpectralParams {
    SpectralParams::ohmic(0.005, 30.0).unwrap()
}

fn sys() -> SystemParams {
    SystemParams::normalized(0.5, PhaseBranch::InPhase).unwrap()
}

fn volterra(c: &mut Criterion) {
    let grid = TimeGrid::new(10.0, 2e-3).unwrap();
    c.bench_function("solve_modes t=10 dt=2e-3", |b| {
        b.iter(|| solve_modes(black_box(&sys()), &env(), &grid).unwrap())
    });
    let modes = solve_modes(&sys(), &env(), &grid).unwrap();
    c.bench_function("coefficients_integral t=10", |b| {
        b.iter(|| coefficients_integral(&sys(), &env(), black_box(&modes)).unwrap())
    });
    c.bench_function("markov_shift", |b| b.iter(|| markov_shift(black_box(&env()), 1.0).unwrap()));
}

fn concurrence(c: &mut Criterion) {
    let grid = TimeGrid::new(10.0, 2e-3).unwrap();
    let modes = solve_modes(&sys(), &env(), &grid).unwrap();
    let s = EcsState::new(EcsKind::PhiMinus, Complex64::new(0.8, 0.0)).unwrap();
    c.bench_function("concurrence track 5001 samples", |b| {
        b.iter(|| concurrence_from_modes(black_box(&s), &modes).unwrap())
    });
}

fn fock(c: &mut Criterion) {
    let coeff_grid = TimeGrid::new(0.2, 2e-3).unwrap();
    let modes = solve_modes(&sys(), &env(), &coeff_grid).unwrap();
    let track = coefficients_integral(&sys(), &env(), &modes).unwrap();
    let space = FockSpace::new(16).unwrap();
    let s = EcsState::new(EcsKind::PhiMinus, Complex64::new(0.8, 0.0)).unwrap();
    let rho = embed_ecs(&s, &space).unwrap();
    let steps = TimeGrid::new(0.2, 1e-2).unwrap();
    let mut group = c.benchmark_group("fock");
    group.sample_size(10);
    group.bench_function("20 RK4 steps N=16", |b| {
        b.iter(|| integrate_master(black_box(&rho), &track, &space, &steps).unwrap())
    });
    group.finish();
}

criterion_group!(benches, volterra, concurrence, fock);
criterion_main!(benches);
