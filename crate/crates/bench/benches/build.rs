//! Local index construction over already sorted partitions: spline plus
//! radix table against an STR bulk load of the same objects.

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use lilis_core::rtree::{RTree, DEFAULT_FANOUT};
use lilis_core::SplineIndex;

fn local_builds(c: &mut Criterion) {
    let mut group = c.benchmark_group("local_build");
    group.sample_size(10);
    for n in [100_000, 1_000_000] {
        let ds = lilis_bench::partitioned(n);
        let (eps, bits) = (ds.config.epsilon, ds.config.radix_bits);
        group.bench_with_input(BenchmarkId::new("learned", n), &ds, |b, ds| {
            b.iter(|| {
                for p in ds.partitions.iter().filter(|p| !p.objects.is_empty()) {
                    let idx =
                        SplineIndex::build(p.objects.iter().map(|o| o.key), eps, bits).unwrap();
                    std::hint::black_box(idx);
                }
            })
        });
        group.bench_with_input(BenchmarkId::new("str_rtree", n), &ds, |b, ds| {
            b.iter_batched(
                || {
                    ds.partitions
                        .iter()
                        .map(|p| p.objects.clone())
                        .collect::<Vec<_>>()
                },
                |parts| {
                    for objs in parts.into_iter().filter(|o| !o.is_empty()) {
                        std::hint::black_box(RTree::bulk_load(objs, DEFAULT_FANOUT).unwrap());
                    }
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, local_builds);
criterion_main!(benches);
