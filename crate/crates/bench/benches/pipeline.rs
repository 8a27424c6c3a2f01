use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use crackwave_bench::{label, params, solver, split, CASES};
use crackwave_core::dispersion::phase_speed;
use crackwave_core::energy::{build_split, KERNEL_TOL};
use crackwave_core::kernel::factorize;
use crackwave_core::{Axis, FieldKind, FieldSolver, LoadProfile, Material};

fn dispersion(c: &mut Criterion) {
    c.bench_function("phase_speed", |b| {
        b.iter(|| phase_speed(Axis::Wavenumber, black_box(3.0), -0.9, 0.707).unwrap())
    });
}

fn factorization(c: &mut Criterion) {
    let mut g = c.benchmark_group("factorize");
    for case in &CASES {
        let p = params(case);
        g.bench_with_input(BenchmarkId::from_parameter(label(case)), &p, |b, p| {
            b.iter(|| factorize(black_box(p), KERNEL_TOL).unwrap())
        });
    }
    g.finish();
}

fn split_and_solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("setup");
    g.sample_size(20);
    for case in &CASES {
        let mat = Material::normalized(case.0, case.1).unwrap();
        let prof = LoadProfile::new(1.0, case.4, case.3).unwrap();
        g.bench_with_input(BenchmarkId::new("build_split", label(case)), &prof, |b, prof| {
            b.iter(|| build_split(&mat, case.2, *prof).unwrap())
        });
        let (mat, s) = split(case);
        let s = Arc::new(s);
        g.bench_with_input(BenchmarkId::new("field_solver", label(case)), &s, |b, s| {
            b.iter(|| FieldSolver::new(&mat, s.clone()).unwrap())
        });
    }
    g.finish();
}

fn field_eval(c: &mut Criterion) {
    let mut g = c.benchmark_group("field");
    let s = solver(&CASES[0]);
    for (kind, x) in [(FieldKind::TotalShear, 0.1), (FieldKind::TotalShear, 5.0), (FieldKind::Opening, -0.1)] {
        g.bench_function(format!("{}_{x}", kind.name()), |b| b.iter(|| s.field(kind, black_box(x)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, dispersion, factorization, split_and_solver, field_eval);
criterion_main!(benches);
