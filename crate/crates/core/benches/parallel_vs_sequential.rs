use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tfbounds_core::bounds::{streamed_wigner_norms, BoundEngine, SweepSpec, SCAN_HALF_WIDTH};
use tfbounds_core::grid::{fourier_transform_2d, make_signal, GridSpec, SignalKind};
use tfbounds_core::norms::Exponent;
use tfbounds_core::tfr::{born_jordan_with, stft_with, tau_wigner_with, ConventionRegistry, BJ_NODES};
use tfbounds_core::weights::WeightFunction;
use tfbounds_core::Exec;

const STRATEGIES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn transforms(c: &mut Criterion) {
    let grid = GridSpec::standard();
    let f = make_signal(&"hermite:2".parse().unwrap(), grid).unwrap();
    let g = make_signal(&SignalKind::unit_gaussian(), grid).unwrap();
    let wig = tau_wigner_with(&f, 0.5, 4, Exec::default()).unwrap();
    let mut group = c.benchmark_group("transforms");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::new("stft", name), &exec, |b, &e| {
            b.iter(|| stft_with(black_box(&f), &g, e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("tau_wigner", name), &exec, |b, &e| {
            b.iter(|| tau_wigner_with(black_box(&f), 0.25, 4, e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("born_jordan", name), &exec, |b, &e| {
            b.iter(|| born_jordan_with(black_box(&f), BJ_NODES, e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fft_2d", name), &exec, |b, &e| {
            b.iter(|| fourier_transform_2d(black_box(&wig), e))
        });
    }
    group.finish();
}

fn streamed_norms(c: &mut Criterion) {
    let grid = GridSpec::symmetric(SCAN_HALF_WIDTH / 4.0, 2048).unwrap();
    let f = make_signal(&SignalKind::TwoGaussian(1.5), grid).unwrap();
    let w = WeightFunction::log();
    let mut group = c.benchmark_group("streamed_wigner_norms");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| streamed_wigner_norms(black_box(&f), &w, 3.3, Exponent::Finite(2.0), e).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let conv = ConventionRegistry::standard().unwrap();
    let spec = SweepSpec {
        signals: vec!["hermite:1".parse().unwrap()],
        lambdas: vec![0.5],
        ..SweepSpec::default_battery()
    };
    let mut group = c.benchmark_group("bound_sweep");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            // a fresh engine per iteration so caches do not carry over
            b.iter(|| BoundEngine::new(GridSpec::standard(), conv, e).unwrap().sweep(black_box(&spec)))
        });
    }
    group.finish();
}

criterion_group!(benches, transforms, streamed_norms, sweep);
criterion_main!(benches);
