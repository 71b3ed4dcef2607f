use std::f64::consts::FRAC_PI_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use steer_bench::fixture;
use steer_core::algebra::mapping_set;
use steer_core::engine::{schmidt, LinearOperator};
use steer_core::optimize::{comm_measure, NormConvention, RealMapping};
use steer_core::protocol::{run_trajectory, ProtocolConfig, SteeringContext};
use steer_core::{KrylovOptions, MappingKind, C64};

fn apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("hamiltonian_apply");
    for ls in [3, 4, 5] {
        let (h, psi) = fixture(ls);
        let mut y = vec![C64::new(0.0, 0.0); psi.amplitudes().len()];
        g.bench_with_input(BenchmarkId::from_parameter(ls), &ls, |b, _| {
            b.iter(|| h.operator().apply(black_box(psi.amplitudes()), &mut y))
        });
    }
    g.finish();
}

fn evolve(c: &mut Criterion) {
    let mut g = c.benchmark_group("krylov_evolve_half_pi");
    g.sample_size(10);
    for ls in [3, 4, 5] {
        let (h, psi) = fixture(ls);
        g.bench_with_input(BenchmarkId::from_parameter(ls), &ls, |b, _| {
            b.iter(|| {
                let mut p = psi.clone();
                p.evolve(h.operator(), FRAC_PI_2, &KrylovOptions::default()).unwrap();
                black_box(p)
            })
        });
    }
    g.finish();
}

fn entropy(c: &mut Criterion) {
    let (h, mut psi) = fixture(4);
    psi.evolve(h.operator(), 3.0, &KrylovOptions::default()).unwrap();
    let bond = psi.layout().n_sites() / 2;
    c.bench_function("schmidt_central_ls4", |b| {
        b.iter(|| schmidt(psi.layout(), black_box(psi.amplitudes()), bond).unwrap())
    });
}

fn trajectory(c: &mut Criterion) {
    let set = mapping_set(MappingKind::M1).unwrap();
    let ctx = SteeringContext::aklt(3, &set).unwrap();
    let cfg = ProtocolConfig {
        periods: 20,
        trajectories: 1,
        ..ProtocolConfig::default()
    };
    let mut g = c.benchmark_group("trajectory");
    g.sample_size(10);
    g.bench_function("ls3_20_periods", |b| b.iter(|| run_trajectory(&ctx, &cfg, black_box(0))));
    g.finish();
}

fn commutation(c: &mut Criterion) {
    let set = mapping_set(MappingKind::M3).unwrap();
    c.bench_function("comm_dense", |b| b.iter(|| comm_measure(black_box(&set), NormConvention::FrobeniusSquared)));
    let rm = RealMapping::new();
    let x: Vec<f64> = (0..40).map(|k| ((k * 7 % 11) as f64 - 5.0) / 10.0).collect();
    c.bench_function("comm_fast_objective", |b| {
        b.iter(|| rm.measure(black_box(&x), NormConvention::FrobeniusSquared))
    });
}

criterion_group!(benches, apply, evolve, entropy, trajectory, commutation);
criterion_main!(benches);
