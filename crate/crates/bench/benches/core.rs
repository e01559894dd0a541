use criterion::{criterion_group, criterion_main, Criterion};
use lieham_bench::{dense_polynomial, sw};
use lieham_core::algebra;
use lieham_core::momentum::decomposition_residual;
use lieham_core::{integrate, IntegratorConfig};
use std::hint::black_box;

fn sw_integration(c: &mut Criterion) {
    let b = sw().unwrap();
    let cfg = IntegratorConfig::default();
    c.bench_function("sw dp54 t in [0, 20]", |bench| {
        bench.iter(|| integrate(&b.system, black_box(&b.x0), b.t0, b.t1, &cfg).unwrap())
    });
    let rk4 = IntegratorConfig::rk4(1e-2);
    c.bench_function("sw rk4 h = 1e-2", |bench| {
        bench.iter(|| integrate(&b.system, black_box(&b.x0), b.t0, b.t1, &rk4).unwrap())
    });
}

fn decomposition(c: &mut Criterion) {
    let b = sw().unwrap();
    let pts = b.system.samples(50, 0).unwrap();
    c.bench_function("sw decomposition residual, 50 points", |bench| {
        bench.iter(|| decomposition_residual(b.system.hamiltonian(), black_box(&pts)).unwrap())
    });
}

fn kks(c: &mut Criterion) {
    let a = algebra::sl2_plus_h3();
    let f = dense_polynomial(&a, 1);
    let g = dense_polynomial(&a, 1);
    c.bench_function("KKS bracket on sl2+h3, dense degree 6 x 6", |bench| {
        bench.iter(|| a.kks_bracket(black_box(&f), black_box(&g)).unwrap())
    });
}

criterion_group!(benches, sw_integration, decomposition, kks);
criterion_main!(benches);
