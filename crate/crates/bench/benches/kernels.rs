use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sphmax_core::measures::{cantor_measure, product_measure, sphere_measure};
use sphmax_core::operators::{default_eps, riesz_row_sum, Source};
use sphmax_core::spectral::{measure_fourier, SpectralGrid};

fn planar_cantor(depth: u32) -> sphmax_core::DiscreteMeasure {
    let c = cantor_measure(0.25, depth).unwrap();
    product_measure(&[c.clone(), c]).unwrap().translate(&[-0.5, -0.5])
}

fn fourier(c: &mut Criterion) {
    let mu = planar_cantor(6);
    let f = vec![1.0; mu.len()];
    let grid = SpectralGrid::new(2, 256, 2.0).unwrap();
    c.bench_function("measure_fourier 4096 atoms 256^2", |b| {
        b.iter(|| measure_fourier(black_box(&f), &mu, &grid).unwrap())
    });
    let sphere = sphere_measure(3, 0.5, 20000).unwrap();
    let f3 = vec![1.0; sphere.len()];
    let grid3 = SpectralGrid::new(3, 64, 1.0).unwrap();
    c.bench_function("measure_fourier sphere 64^3", |b| {
        b.iter(|| measure_fourier(black_box(&f3), &sphere, &grid3).unwrap())
    });
}

fn averages(c: &mut Criterion) {
    let mu = planar_cantor(6);
    let f = vec![1.0; mu.len()];
    let grid = SpectralGrid::new(2, 256, 2.0).unwrap();
    let source = Source::from_measure(&f, &mu, &grid).unwrap();
    let eps = default_eps(&grid);
    c.bench_function("spherical_average 256^2", |b| {
        b.iter(|| source.spherical_average(black_box(0.5), eps).unwrap())
    });
}

fn riesz(c: &mut Criterion) {
    let mu = planar_cantor(8);
    let x = mu.atom(0).to_vec();
    c.bench_function("riesz_row_sum depth 8", |b| {
        b.iter(|| riesz_row_sum(&mu, black_box(1.2), &x, 18))
    });
}

criterion_group!(benches, fourier, averages, riesz);
criterion_main!(benches);
