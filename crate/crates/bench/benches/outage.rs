use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use hdfd::experiments::{presets, reference_defaults};
use hdfd::validation::random_grid;
use hdfd::{
    mc_estimate, quad_conditional, run_sweep, system_outage, traditional_outage, EventTag, Hop,
};

fn closed_form(c: &mut Criterion) {
    let config = reference_defaults();
    c.bench_function("system_outage", |b| {
        b.iter(|| system_outage(black_box(&config)))
    });
    c.bench_function("traditional_outage", |b| {
        b.iter(|| traditional_outage(black_box(&config)))
    });
    let grid = random_grid(1000, 1);
    c.bench_function("system_outage/1000_random_configs", |b| {
        b.iter(|| grid.iter().map(|c| system_outage(c).p_sys).sum::<f64>())
    });
}

fn oracles(c: &mut Criterion) {
    let config = random_grid(3, 7)[2];
    c.bench_function("quad_conditional/all_six", |b| {
        b.iter(|| {
            EventTag::ALL
                .iter()
                .flat_map(|&t| Hop::ALL.iter().map(move |&h| (t, h)))
                .map(|(t, h)| quad_conditional(t, h, black_box(&config)).unwrap())
                .sum::<f64>()
        })
    });
    let mut group = c.benchmark_group("mc_estimate");
    group.sample_size(10);
    group.bench_function("65536_samples", |b| {
        b.iter_batched(
            || 0u64,
            |seed| mc_estimate(&config, 1 << 16, seed).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let spec = presets::source_power();
    c.bench_function("run_sweep/source_power_analytic", |b| {
        b.iter(|| run_sweep(black_box(&spec)).unwrap())
    });
}

criterion_group!(benches, closed_form, oracles, sweeps);
criterion_main!(benches);
