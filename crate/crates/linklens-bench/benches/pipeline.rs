//! End-to-end passes: generation, the entropy series, and the detectors.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use linklens_bench::{background_corpus, planted_corpus, planted_spec};
use linklens_core::detect::{
    detect_bonus_hunters, detect_wash_trading, infer_cross_layer_links, DetectorParams,
    LinkScenario,
};
use linklens_core::entropy::{entropy_series, NodeConvention};
use linklens_core::graph::{EdgeFilter, PartitionMode};
use linklens_core::synth::generate;
use linklens_core::ties::{classify_ties, holding_relation};

fn bench_generation(c: &mut Criterion) {
    let spec = planted_spec(7);
    c.bench_function("synth/2k_accounts_20_days", |b| {
        b.iter(|| generate(black_box(&spec)).unwrap())
    });
}

fn bench_entropy_series(c: &mut Criterion) {
    let dataset = background_corpus(10_000, 6, 8);
    c.bench_function("entropy_series/10k_accounts_day_buckets", |b| {
        b.iter(|| {
            entropy_series(
                black_box(&dataset),
                &EdgeFilter::financial(),
                86_400,
                PartitionMode::Weak,
                NodeConvention::Post,
            )
            .unwrap()
        })
    });
}

fn bench_detectors(c: &mut Criterion) {
    let (dataset, _) = planted_corpus(9);
    let params = DetectorParams::default();
    let hunters = detect_bonus_hunters(&dataset, &params);
    let ties = classify_ties(&holding_relation(&dataset), 2).unwrap();

    let mut group = c.benchmark_group("detect");
    group.bench_function("bonus_hunters", |b| {
        b.iter(|| detect_bonus_hunters(black_box(&dataset), &params))
    });
    group.bench_function("wash_trading", |b| {
        b.iter(|| detect_wash_trading(black_box(&dataset), &params))
    });
    group.bench_function("cross_layer_links", |b| {
        b.iter(|| {
            infer_cross_layer_links(
                black_box(&dataset),
                &ties,
                &hunters,
                &params,
                &[
                    LinkScenario::S1L2Cluster,
                    LinkScenario::S2L1Linkage,
                    LinkScenario::S3InterUser,
                ],
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_generation, bench_entropy_series, bench_detectors);
criterion_main!(benches);
