// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;

use discsteer::bessel::{compute_zeros, QuadratureRule};
use discsteer::dynamics::{simulate_linearized, ControlSignal, GalerkinSystem};
use discsteer::moment::{build_frequencies, default_horizon, solve_moment, MomentProblem};
use discsteer::spectral::{RadialBasis, TargetParams};
use num_complex::Complex64;

/// A one-thread pool against rayon's default sizing.
fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    [("single-thread", 1), ("default-pool", 0)]
        .into_iter()
        .map(|(name, n)| {
            (
                name,
                ThreadPoolBuilder::new().num_threads(n).build().unwrap(),
            )
        })
        .collect()
}

fn coupling_matrix(c: &mut Criterion) {
    let table = compute_zeros(0, 80, 1e-12).unwrap();
    let basis = RadialBasis::new(&table, 80).unwrap();
    let rule = QuadratureRule::gauss_legendre(256);
    let mut group = c.benchmark_group("coupling_matrix");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(basis.coupling_matrix(&rule))))
        });
    }
    group.finish();
}

fn linearized(c: &mut Criterion) {
    let table = compute_zeros(0, 40, 1e-12).unwrap();
    let sys = GalerkinSystem::new(&table, 40).unwrap();
    let params = TargetParams::new(0.25, 0.25).unwrap();
    let v = ControlSignal::from_fn(
        1.0,
        1 << 16,
        |t| (2.0 * PI * t).sin() + 0.3 * (6.0 * PI * t).sin(),
        None,
    )
    .unwrap();
    let mut group = c.benchmark_group("simulate_linearized");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(simulate_linearized(&v, &params, &sys).unwrap())))
        });
    }
    group.finish();
}

fn moment_sampling(c: &mut Criterion) {
    let table = compute_zeros(0, 40, 1e-12).unwrap();
    let horizon = default_horizon(&table).unwrap();
    let freqs = build_frequencies(&table, 40).unwrap().first(30);
    let d = (0..freqs.len())
        .map(|k| Complex64::new(1.0 / (1.0 + k as f64), if k == 0 { 0.0 } else { 0.1 }))
        .collect();
    let sol = solve_moment(&MomentProblem::new(freqs, d, Some(0.0), horizon).unwrap()).unwrap();
    let mut group = c.benchmark_group("moment_sample");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(sol.sample(1 << 16))))
        });
    }
    group.finish();
}

criterion_group!(benches, coupling_matrix, linearized, moment_sampling);
criterion_main!(benches);
