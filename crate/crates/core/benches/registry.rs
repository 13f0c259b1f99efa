use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use divkit::harness::registry::{run_on, select, Context, Execution};
use divkit::harness::InstanceGenerator;

fn registry(c: &mut Criterion) {
    let checks = select(&[]).unwrap();
    let ctx = Context::default();
    let mut group = c.benchmark_group("registry");
    group.sample_size(20);
    for count in [5, 20, 80] {
        let gen = InstanceGenerator {
            count,
            ..InstanceGenerator::default()
        };
        let instances = gen.instances().unwrap();
        for (label, mode) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(label, instances.len()), &instances, |b, inst| {
                b.iter(|| run_on(black_box(inst), &checks, &ctx, mode))
            });
        }
    }
    group.finish();
}

fn instance_stream(c: &mut Criterion) {
    let gen = InstanceGenerator {
        count: 80,
        ..InstanceGenerator::default()
    };
    c.bench_function("instance_stream/960", |b| b.iter(|| black_box(&gen).instances().unwrap()));
}

criterion_group!(benches, registry, instance_stream);
criterion_main!(benches);
