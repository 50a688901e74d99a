//! End-to-end benchmarks: hierarchization, interpolant evaluation,
//! network synthesis, and materialized network evaluation.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use korogrid_core::harness::find_target;
use korogrid_core::hierarchy::hierarchize_hat;
use korogrid_core::network::ActivationKind;
use korogrid_core::synthesis::{synth_korobov_deep, synth_product_shallow, ActivationFamily};

fn bench_hierarchize(c: &mut Criterion) {
    let target = find_target("parabola", 2).unwrap();
    c.bench_function("hierarchize_parabola_d2_n6", |b| {
        b.iter(|| hierarchize_hat(|x: &[f64]| target.eval(x), 2, black_box(6)).unwrap())
    });
}

fn bench_interpolant_eval(c: &mut Criterion) {
    let target = find_target("parabola", 2).unwrap();
    let interp = hierarchize_hat(|x: &[f64]| target.eval(x), 2, 6).unwrap();
    c.bench_function("interpolant_eval_d2_n6", |b| {
        b.iter(|| interp.eval(black_box(&[0.371, 0.642])))
    });
}

fn bench_synth_deep(c: &mut Criterion) {
    let target = find_target("parabola", 2).unwrap();
    let mut group = c.benchmark_group("synthesis");
    group.sample_size(20);
    group.bench_function("deep_parabola_d2_eps0.2", |b| {
        b.iter(|| {
            synth_korobov_deep(
                |x: &[f64]| target.eval(x),
                2,
                black_box(0.2),
                target.seminorm,
                ActivationKind::Softplus,
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_product_net_eval(c: &mut Criterion) {
    let report = synth_product_shallow(3, 0.05, ActivationFamily::ExactRelu).unwrap();
    let net = report.net.clone().expect("product net materializes");
    c.bench_function("product_netspec_eval_d3", |b| {
        b.iter(|| net.eval(black_box(&[0.4, 0.8, 0.6])).unwrap())
    });
}

criterion_group!(
    benches,
    bench_hierarchize,
    bench_interpolant_eval,
    bench_synth_deep,
    bench_product_net_eval
);
criterion_main!(benches);
