use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qca_core::dirac::dirac_search;
use qca_core::linalg::unitary_eigen;
use qca_core::maxwell::fock_commutator_deviation;
use qca_core::weyl::{dispersion, WeylVariant};
use qca_core::Builtin;

fn k_operator(c: &mut Criterion) {
    let a = Builtin::from_name("dirac-bcc-a-plus", 0.0, 0.3).unwrap().descriptor();
    let k = [0.4, -0.9, 1.3];
    c.bench_function("k_operator/dirac-bcc", |b| b.iter(|| a.k_operator(black_box(&k))));
    let ak = a.k_operator(&k);
    c.bench_function("unitary_eigen/4x4", |b| b.iter(|| unitary_eigen(black_box(&ak))));
}

fn closed_forms(c: &mut Criterion) {
    let v = WeylVariant::from_name("bcc-a-plus", 0.0).unwrap();
    let k = [0.4, -0.9, 1.3];
    c.bench_function("weyl_dispersion/bcc", |b| b.iter(|| dispersion(&v, black_box(&k))));
}

const POLARIZATION: [[f64; 3]; 2] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];

fn fock(c: &mut Criterion) {
    c.bench_function("fock_deviation/N=16,M=4", |b| {
        b.iter(|| fock_commutator_deviation(black_box(16), 4, POLARIZATION, 0, 0).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let v = WeylVariant::from_name("weyl-1d", 0.0).unwrap();
    let mut g = c.benchmark_group("dirac_search");
    g.sample_size(10);
    g.bench_function("weyl-1d/restarts=4", |b| b.iter(|| dirac_search(&v, 4, black_box(1), 20)));
    g.finish();
}

criterion_group!(benches, k_operator, closed_forms, fock, search);
criterion_main!(benches);
