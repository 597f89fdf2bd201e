//! Graph construction, component partitioning, and tie classification.

use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

use linklens_bench::background_corpus;
use linklens_core::entropy::IncrementalEntropy;
use linklens_core::graph::{
    build_graph, components, ComponentPartition, EdgeFilter, PartitionMode,
};
use linklens_core::synth::SplitMix64;
use linklens_core::ties::{classify_ties, holding_relation};

fn bench_build_graph(c: &mut Criterion) {
    let dataset = background_corpus(10_000, 6, 1);
    c.bench_function("build_graph/10k_accounts", |b| {
        b.iter(|| build_graph(black_box(&dataset), &EdgeFilter::financial(), None, true).unwrap())
    });
}

fn bench_components(c: &mut Criterion) {
    let dataset = background_corpus(10_000, 6, 2);
    let graph = build_graph(&dataset, &EdgeFilter::financial(), None, true).unwrap();
    let mut group = c.benchmark_group("components");
    group.bench_function("weak", |b| {
        b.iter(|| components(black_box(&graph), PartitionMode::Weak))
    });
    group.bench_function("strong", |b| {
        b.iter(|| components(black_box(&graph), PartitionMode::Strong))
    });
    group.finish();
}

fn bench_incremental_insertion(c: &mut Criterion) {
    const NODES: usize = 50_000;
    const EDGES: usize = 100_000;
    let mut rng = SplitMix64::new(3);
    let edges: Vec<(u32, u32)> = (0..EDGES)
        .map(|_| {
            (
                rng.next_range(NODES as u64) as u32,
                rng.next_range(NODES as u64) as u32,
            )
        })
        .collect();
    c.bench_function("incremental/100k_edges_50k_nodes", |b| {
        b.iter_batched(
            || ComponentPartition::weak_singletons(NODES),
            |mut partition| {
                let mut entropy = IncrementalEntropy::new();
                for _ in 0..NODES {
                    entropy.add_isolated_node();
                }
                for &(x, y) in &edges {
                    let delta = partition.insert_edge_incremental(x, y).unwrap();
                    if let Some(merge) = delta.merged {
                        entropy.merge(merge.kept_size_before, merge.absorbed_size);
                    }
                }
                black_box(entropy.h())
            },
            BatchSize::LargeInput,
        )
    });
}

fn bench_classify_ties(c: &mut Criterion) {
    let dataset = background_corpus(5_000, 10, 4);
    let holds = holding_relation(&dataset);
    c.bench_function("classify_ties/5k_accounts", |b| {
        b.iter(|| classify_ties(black_box(&holds), 2).unwrap())
    });
}

criterion_group!(
    benches,
    bench_build_graph,
    bench_components,
    bench_incremental_insertion,
    bench_classify_ties
);
criterion_main!(benches);
