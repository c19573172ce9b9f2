use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use sturm_core::asymptotics::f_star;
use sturm_core::dimension::{ln_lengths, pre_dimension, LengthMode};
use sturm_core::tracemap::chebyshev;
use sturm_core::{BandTree, ContinuedFraction, SpectralParams, TraceLabel};

fn trace_eval(c: &mut Criterion) {
    let params = SpectralParams::new(24.0, 192).unwrap();
    let qs = ContinuedFraction::golden_mean().quotients(16).unwrap();
    let x = params.real(1.2345);
    let mut group = c.benchmark_group("trace_eval");
    for k in [4u32, 8, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| TraceLabel::new(k, 1).eval(&qs, black_box(&x), &params).unwrap())
        });
    }
    group.finish();
    let t = params.real(0.7);
    c.bench_function("chebyshev_p32", |b| b.iter(|| chebyshev(32, black_box(&t))));
}

fn enumeration(c: &mut Criterion) {
    let cf = ContinuedFraction::golden_mean();
    let mut group = c.benchmark_group("enumerate_golden_v24");
    group.sample_size(10);
    for order in [4u32, 6, 8] {
        let params = SpectralParams::new(24.0, SpectralParams::required_precision(24.0, order).max(192)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(order), &order, |b, &order| {
            b.iter(|| BandTree::enumerate(&cf, &params, order).unwrap())
        });
    }
    group.finish();
}

fn root_solve(c: &mut Criterion) {
    let params = SpectralParams::new(24.0, 192).unwrap();
    let tree = BandTree::enumerate(&ContinuedFraction::golden_mean(), &params, 10).unwrap();
    let ln_len = ln_lengths(&tree, 10, LengthMode::Endpoints).unwrap();
    c.bench_function("pre_dimension_order10", |b| b.iter(|| pre_dimension(black_box(&ln_len)).unwrap()));
    let silver = ContinuedFraction::periodic(vec![2]).unwrap();
    c.bench_function("f_star_period2", |b| b.iter(|| f_star(black_box(&silver)).unwrap()));
}

criterion_group!(benches, trace_eval, enumeration, root_solve);
criterion_main!(benches);
