use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::f64::consts::PI;

use lumpvol_bench::bench_tuple;
use lumpvol_core::metric::l2_metric_matrix;
use lumpvol_core::sphere::{ScalarField, SphereGrid};
use lumpvol_core::volume::mc_volume_l2;
use lumpvol_core::vortex::{kw_solve, norm_function, vortex_metric, VortexConfig};

fn bench_transform(c: &mut Criterion) {
    let grid = SphereGrid::new(32);
    let f = ScalarField::from_fn(std::sync::Arc::clone(&grid), |th, ph, _| {
        num_complex::Complex64::new(th.cos() * ph.sin(), th.sin())
    });
    c.bench_function("sh_roundtrip_L32", |b| {
        b.iter(|| {
            let coeffs = f.analyze();
            ScalarField::synthesize(&grid, &coeffs)
        })
    });
}

fn bench_l2_metric(c: &mut Criterion) {
    let grid = SphereGrid::new(24);
    let p = bench_tuple();
    c.bench_function("l2_metric_L24_q3", |b| {
        b.iter(|| l2_metric_matrix(&p, &grid).unwrap())
    });
}

fn bench_kw_solve(c: &mut Criterion) {
    let grid = SphereGrid::new(16);
    let p = bench_tuple();
    let h = norm_function(&p, &grid).unwrap();
    let cfg = VortexConfig::new(1, 1, 32.0 * PI).unwrap();
    c.bench_function("kw_solve_L16", |b| {
        b.iter_batched(|| h.clone(), |h| kw_solve(&h, &cfg, 1e-10).unwrap(), BatchSize::SmallInput)
    });
}

fn bench_vortex_metric(c: &mut Criterion) {
    let grid = SphereGrid::new(16);
    let p = bench_tuple();
    let cfg = VortexConfig::new(1, 1, 16.0 * PI).unwrap();
    c.bench_function("vortex_metric_L16_q3", |b| {
        b.iter(|| vortex_metric(&p, &cfg, &grid).unwrap())
    });
}

fn bench_mc_small(c: &mut Criterion) {
    c.bench_function("mc_volume_l2_n64_L12", |b| {
        b.iter(|| mc_volume_l2(1, 1, 64, 7, 12).unwrap())
    });
}

criterion_group!(
    benches,
    bench_transform,
    bench_l2_metric,
    bench_kw_solve,
    bench_vortex_metric,
    bench_mc_small
);
criterion_main!(benches);
