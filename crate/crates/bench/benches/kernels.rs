//! Dense-kernel timings: gram accumulation, Cholesky, eigendecomposition,
//! and the power-iteration spectral radius.

use criterion::{criterion_group, criterion_main, Criterion};
use scnlab::numkit::{self, CholFactor};
use scnlab_bench::random_system_parts;
use std::hint::black_box;

fn bench_kernels(c: &mut Criterion) {
    let (blocks, _) = random_system_parts(1200, &[300], 3);
    let h = &blocks[0];
    let mut g = h.gram();
    g.add_diag(0.1);

    let mut group = c.benchmark_group("kernels_300");
    group.sample_size(10);
    group.bench_function("gram", |b| b.iter(|| black_box(h).gram()));
    group.bench_function("cholesky", |b| {
        b.iter(|| CholFactor::new(black_box(&g)).unwrap())
    });
    group.bench_function("eigh", |b| b.iter(|| numkit::eigh(black_box(&g)).unwrap()));
    group.bench_function("spectral_radius", |b| {
        b.iter(|| numkit::spectral_radius(black_box(&g), 200, 1e-9).unwrap())
    });
    group.finish();

    let y: Vec<f64> = (0..1200).map(|i| (i as f64 * 0.37).sin()).collect();
    let mut group = c.benchmark_group("solves_300");
    group.sample_size(10);
    group.bench_function("pinv_solve", |b| {
        b.iter(|| numkit::pinv_solve(black_box(h), black_box(&y), 0.0).unwrap())
    });
    group.bench_function("ridge_solve", |b| {
        b.iter(|| numkit::ridge_solve(black_box(h), black_box(&y), 0.1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
