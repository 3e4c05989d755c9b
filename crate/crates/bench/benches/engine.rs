use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use favard_core::analysis::QuadConfig;
use favard_core::projection::{alpha_float, generation, DEFAULT_SIZE_CAP};
use favard_core::{alpha_sequence, estimate_favard_mc, favard, Direction, Ifs2D, NeedleConfig, Rational};

fn exact_generation(c: &mut Criterion) {
    let k = Ifs2D::preset("four-corner").unwrap();
    let mut group = c.benchmark_group("exact_generation");
    for (p, q) in [(1, 3), (2, 7), (13, 47)] {
        let d = Direction::x(Rational::frac(p, q)).unwrap();
        for n in [4, 6, 8] {
            group.bench_with_input(BenchmarkId::new(format!("{p}/{q}"), n), &n, |b, &n| {
                b.iter(|| generation(black_box(&k), &d, n, DEFAULT_SIZE_CAP).unwrap())
            });
        }
    }
    group.finish();
}

fn float_generation(c: &mut Criterion) {
    let k = Ifs2D::preset("four-corner").unwrap();
    let mut group = c.benchmark_group("float_generation");
    for n in [4, 6, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| alpha_float(black_box(&k), 0.3, n, DEFAULT_SIZE_CAP).unwrap())
        });
    }
    group.finish();
}

fn alpha_sequences(c: &mut Criterion) {
    let k = Ifs2D::preset("four-corner").unwrap();
    let d = Direction::x(Rational::frac(17, 41)).unwrap();
    c.bench_function("alpha_sequence/depth8", |b| {
        b.iter(|| alpha_sequence(black_box(&k), &d, 8).unwrap())
    });
    c.bench_function("favard/n3", |b| {
        let cfg = QuadConfig {
            tol: 1e-4,
            ..QuadConfig::default()
        };
        b.iter(|| favard(black_box(&k), 3, &cfg).unwrap())
    });
}

fn needle(c: &mut Criterion) {
    let k = Ifs2D::preset("four-corner").unwrap();
    let cfg = NeedleConfig::for_ifs(&k, 2, 100_000, 1);
    let mut group = c.benchmark_group("needle");
    group.sample_size(20);
    group.bench_function("n2_100k", |b| {
        b.iter(|| estimate_favard_mc(black_box(&k), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, exact_generation, float_generation, alpha_sequences, needle);
criterion_main!(benches);
