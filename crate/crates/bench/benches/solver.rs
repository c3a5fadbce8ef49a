use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use smdpen_bench::{demo_case, penalty_fixture, small_regression_case};
use smdpen_core::penalty::{delta, penalty_gradient};

fn penalty_gradients(c: &mut Criterion) {
    let mut group = c.benchmark_group("penalty_gradient");
    for n in [10, 100, 1000] {
        let (cs, x, g) = penalty_fixture(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| penalty_gradient(&cs, black_box(&g), black_box(&x), 2.0).unwrap())
        });
    }
    group.finish();

    let (cs, x, g) = penalty_fixture(100);
    c.bench_function("directional_derivative/100", |b| {
        b.iter(|| delta(&cs, black_box(&x), black_box(&g), 2.0).unwrap())
    });
}

fn solver_runs(c: &mut Criterion) {
    let demo = demo_case();
    c.bench_function("run/penalty_demo_1d", |b| b.iter(|| demo.run().unwrap()));
    let regression = small_regression_case(500);
    c.bench_function("run/regression_80x20_500", |b| {
        b.iter(|| regression.run().unwrap())
    });
}

criterion_group!(benches, penalty_gradients, solver_runs);
criterion_main!(benches);
