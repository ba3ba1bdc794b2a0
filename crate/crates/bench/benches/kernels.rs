use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use stepanov_core::evosolve::{green_apply, DichotomySpec};
use stepanov_core::fixedpoint::{SolverConfig, TimeGrid};
use stepanov_core::fracsolve::FractionalOperator;
use stepanov_core::kernel::mittag_leffler;
use stepanov_core::measure::ergodic_mean;
use stepanov_core::{FractionalKernelSpec, MeasureDensity, Signal, StepanovExponent};

fn ergodic(c: &mut Criterion) {
    let p = StepanovExponent::new(1.0).unwrap();
    c.bench_function("ergodic_mean arctan-shift r=100", |b| {
        b.iter(|| ergodic_mean(&Signal::ArctanShift, &MeasureDensity::ExpLeft, p, black_box(100.0)).unwrap())
    });
}

fn mittag(c: &mut Criterion) {
    let zs: Vec<f64> = (0..64).map(|i| -0.5 * i as f64).collect();
    c.bench_function("mittag_leffler(0.75, 0.75, z) x64", |b| {
        b.iter(|| zs.iter().map(|&z| mittag_leffler(0.75, 0.75, black_box(z)).unwrap()).sum::<f64>())
    });
}

fn convolution(c: &mut Criterion) {
    let kernel = FractionalKernelSpec::dirichlet_interval(0.75, 8).unwrap();
    let nodes = 4096;
    let op = FractionalOperator::new(&kernel, 0.0, 0.05, nodes).unwrap();
    let f: Vec<f64> = (0..nodes * 8).map(|i| (i as f64 * 1e-3).sin()).collect();
    c.bench_function("fft convolution 8 modes x 4096 nodes", |b| b.iter(|| op.convolve(black_box(&f))));
}

fn green(c: &mut Criterion) {
    let spec = DichotomySpec::autonomous(vec![1.0, -2.0, 4.0], 1.0, 1.0).unwrap();
    let cfg = SolverConfig::new(TimeGrid::new(0.0, 10.0, 0.05).unwrap());
    let forcing = Signal::cosine(1.0, 1.0);
    c.bench_function("green_apply 3 modes", |b| b.iter(|| green_apply(black_box(&forcing), &spec, &cfg).unwrap()));
}

criterion_group!(benches, ergodic, mittag, convolution, green);
criterion_main!(benches);
