use std::hint::black_box;

use atomlink::scatter::{spectrum_sweep, ScatterParams};
use atomlink::transfer::{optimize, Axis, AxisScale, LossTemplate, OptimizationGrid, ScheduleSpec, SweepBounds};
use atomlink::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn spectrum(c: &mut Criterion) {
    let p = ScatterParams::eit_lattice();
    let mut group = c.benchmark_group("spectrum_2001");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| spectrum_sweep(-20.0, 20.0, 2001, black_box(&p), exec).unwrap())
        });
    }
    group.finish();
}

fn optimizer(c: &mut Criterion) {
    let template = LossTemplate {
        kappa: 0.2,
        kappa_in: 1.0,
        gamma: 0.0005,
    };
    let grid = OptimizationGrid {
        eta_c: Axis {
            min: 1.0,
            max: 100.0,
            n: 8,
            scale: AxisScale::Log,
        },
        delta2: Axis {
            min: 0.5,
            max: 20.0,
            n: 8,
            scale: AxisScale::Linear,
        },
    };
    let spec = ScheduleSpec {
        bounds: SweepBounds::Purity(0.99),
        n_steps: 400,
    };
    let mut group = c.benchmark_group("optimize_8x8");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| optimize(&template, black_box(&grid), &spec, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, spectrum, optimizer);
criterion_main!(benches);
