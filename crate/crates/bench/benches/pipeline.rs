use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::f64::consts::PI;
use std::hint::black_box;

use slmspec::sensitivity::{differentiate, gain_curve};
use slmspec::spectrometer::{
    auto_scan_grid, beat_traces, estimate_frequency, BeatScanConfig, ReferenceSetup, TraceSource,
};
use slmspec::{closed_form_trace, correlation_trace, log_correlation, make_slm, ApparatusConfig, Sampling, ScanGrid};

fn correlation(c: &mut Criterion) {
    let mut group = c.benchmark_group("correlation_trace");
    group.sample_size(20);
    for n in [2usize, 10, 100] {
        let grid = ScanGrid::new(0.0, 2.0 * PI, (80 * n + 1).max(4001)).unwrap();
        let config = ApparatusConfig::new(1.0, 0.0, n).unwrap();
        let slm = make_slm(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| correlation_trace(&config, &slm, black_box(&grid), Sampling::Enforced).unwrap())
        });
    }
    group.finish();
}

fn log_product(c: &mut Criterion) {
    let n = 10_000;
    let config = ApparatusConfig::new(1.0, 0.3, n).unwrap();
    let slm = make_slm(n).unwrap();
    c.bench_function("log_correlation/10000", |b| {
        b.iter(|| log_correlation(black_box(&config), &slm).unwrap())
    });
}

fn slopes(c: &mut Criterion) {
    let grid = ScanGrid::new(-PI / 2.0, PI / 2.0, 20_001).unwrap();
    let trace = closed_form_trace(100, &grid).unwrap();
    c.bench_function("differentiate/20001", |b| {
        b.iter(|| differentiate(black_box(&trace)).unwrap())
    });
    c.bench_function("gain_curve/2..100", |b| {
        b.iter(|| gain_curve(black_box(&[2, 5, 10, 20, 50, 100])).unwrap())
    });
}

fn wavemeter(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_frequency");
    group.sample_size(20);
    for n in [2usize, 10, 100] {
        let grid = auto_scan_grid(n, 0.1, 0.1).unwrap();
        let setup = ReferenceSetup::new(1.0, n, grid).unwrap();
        let (unknown, _) = beat_traces(&BeatScanConfig::new(setup, 1.1).unwrap(), TraceSource::ClosedForm).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| estimate_frequency(&setup, black_box(&unknown)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, correlation, log_product, slopes, wavemeter);
criterion_main!(benches);
