//! End-to-end pipeline tests: generated bundles survive ingestion unchanged,
//! plant-free populations stay finding-free, and planted patterns come back
//! from the detectors with exactly the identities recorded in ground truth.

use std::collections::BTreeSet;
use std::fs;

use linklens_core::detect::{
    detect_bonus_hunters, detect_wash_trading, infer_cross_layer_links, DetectorParams,
    LinkScenario, WashAnomaly,
};
use linklens_core::entropy::{entropy_series, NodeConvention};
use linklens_core::graph::{EdgeFilter, PartitionMode};
use linklens_core::ingest::{load_dataset, FileFormat};
use linklens_core::synth::{generate, write_bundle, PlantKind, PlantSpec, ScenarioSpec, GENESIS_TS};
use linklens_core::ties::{classify_ties, holding_relation};
use linklens_core::{Address, WEI_PER_ETH};

fn rich_spec(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        seed,
        n_background_accounts: 60,
        n_days: 12,
        daily_tx_rate: 0.7,
        price_range_wei: (WEI_PER_ETH / 1_000, WEI_PER_ETH / 10),
        start_ts: GENESIS_TS,
        plants: vec![
            PlantSpec {
                id: "hunters-a".into(),
                kind: PlantKind::HunterCluster { size: 3, main: 0 },
            },
            PlantSpec {
                id: "hunters-b".into(),
                kind: PlantKind::HunterCluster { size: 2, main: 2 },
            },
            PlantSpec {
                id: "wash".into(),
                kind: PlantKind::WashCohort {
                    count: 8,
                    day_range: (3, 6),
                },
            },
            PlantSpec {
                id: "ring".into(),
                kind: PlantKind::S2Linkage,
            },
            PlantSpec {
                id: "kols".into(),
                kind: PlantKind::KolElite {
                    count: 4,
                    holder_target: 9_000,
                },
            },
        ],
    }
}

#[test]
fn bundle_round_trips_through_ingestion() {
    let (dataset, truth) = generate(&rich_spec(41)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = write_bundle(&dataset, &truth, dir.path()).unwrap();

    let loaded = load_dataset(
        Some((&paths.users, FileFormat::Csv)),
        Some((&paths.txs_l1, FileFormat::Csv)),
        Some((&paths.txs_l2, FileFormat::Csv)),
        Some(&paths.follows),
    )
    .unwrap();

    assert!(
        loaded.row_errors.is_empty(),
        "generated bundle should ingest cleanly: {:?}",
        loaded.row_errors
    );
    assert_eq!(loaded.dataset.transactions, dataset.transactions);
    assert_eq!(loaded.dataset.follows, dataset.follows);
    assert_eq!(loaded.dataset.accounts.len(), dataset.accounts.len());
    for (got, want) in loaded.dataset.accounts.iter().zip(&dataset.accounts) {
        assert_eq!(got.address, want.address);
        assert_eq!(got.layer, want.layer);
        assert_eq!(got.profile, want.profile);
        assert_eq!(got.first_seen, want.first_seen);
    }
}

#[test]
fn bundles_rewrite_byte_identically() {
    let spec = rich_spec(42);
    let (d1, t1) = generate(&spec).unwrap();
    let (d2, t2) = generate(&spec).unwrap();
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let p1 = write_bundle(&d1, &t1, dir1.path()).unwrap();
    let p2 = write_bundle(&d2, &t2, dir2.path()).unwrap();
    for (a, b) in [
        (&p1.users, &p2.users),
        (&p1.txs_l1, &p2.txs_l1),
        (&p1.txs_l2, &p2.txs_l2),
        (&p1.follows, &p2.follows),
        (&p1.ground_truth, &p2.ground_truth),
    ] {
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{a:?} differs");
    }
}

#[test]
fn background_only_populations_stay_clean_across_seeds() {
    let params = DetectorParams::default();
    for seed in 0..50u64 {
        let spec = ScenarioSpec {
            seed,
            n_background_accounts: 30,
            n_days: 8,
            daily_tx_rate: 0.6,
            price_range_wei: (WEI_PER_ETH / 1_000, WEI_PER_ETH / 10),
            start_ts: GENESIS_TS,
            plants: Vec::new(),
        };
        let (dataset, truth) = generate(&spec).unwrap();
        assert!(truth.plants.is_empty());

        let hunters = detect_bonus_hunters(&dataset, &params);
        assert!(hunters.is_empty(), "seed {seed}: spurious hunters {hunters:?}");

        let wash = detect_wash_trading(&dataset, &params);
        assert!(
            wash.findings.is_empty(),
            "seed {seed}: spurious wash findings {:?}",
            wash.findings
        );

        let holds = holding_relation(&dataset);
        let ties = classify_ties(&holds, 2).unwrap();
        let links = infer_cross_layer_links(
            &dataset,
            &ties,
            &hunters,
            &params,
            &[LinkScenario::S1L2Cluster],
        )
        .unwrap();
        assert!(
            links.links.is_empty(),
            "seed {seed}: spurious links {:?}",
            links.links
        );
    }
}

#[test]
fn planted_patterns_match_ground_truth_identities() {
    let (dataset, truth) = generate(&rich_spec(7)).unwrap();
    let params = DetectorParams::default();

    let hunters = detect_bonus_hunters(&dataset, &params);
    let found_hunters: BTreeSet<(Address, Vec<Address>)> = hunters
        .iter()
        .map(|f| (f.main, f.subsidiary_addresses()))
        .collect();
    assert_eq!(found_hunters, truth.all_hunters());

    let wash = detect_wash_trading(&dataset, &params);
    let found_wash: BTreeSet<(Address, WashAnomaly)> = wash
        .findings
        .iter()
        .map(|f| (f.address, f.anomaly))
        .collect();
    assert_eq!(found_wash, truth.all_wash());

    let holds = holding_relation(&dataset);
    let ties = classify_ties(&holds, 2).unwrap();
    let links = infer_cross_layer_links(
        &dataset,
        &ties,
        &hunters,
        &params,
        &[
            LinkScenario::S1L2Cluster,
            LinkScenario::S2L1Linkage,
            LinkScenario::S3InterUser,
        ],
    )
    .unwrap();
    let found_links: BTreeSet<(LinkScenario, Vec<Address>)> = links
        .links
        .iter()
        .map(|l| (l.scenario, l.accounts.clone()))
        .collect();
    assert_eq!(found_links, truth.all_links());
}

#[test]
fn entropy_series_runs_over_generated_history() {
    let (dataset, _) = generate(&rich_spec(11)).unwrap();
    let series = entropy_series(
        &dataset,
        &EdgeFilter::financial(),
        86_400,
        PartitionMode::Weak,
        NodeConvention::Post,
    )
    .unwrap();
    assert!(!series.points.is_empty());
    // Cumulative column is the running sum of the loss column.
    let mut running = 0.0;
    for point in &series.points {
        running += point.loss;
        assert!((point.cumulative_loss - running).abs() < 1e-9);
        assert!(point.loss >= 0.0);
    }
    // Under the boundary-snapshot convention the total loss telescopes to
    // the negated final entropy regardless of bucket width.
    let day = entropy_series(
        &dataset,
        &EdgeFilter::financial(),
        86_400,
        PartitionMode::Weak,
        NodeConvention::Pre,
    )
    .unwrap();
    let two_day = entropy_series(
        &dataset,
        &EdgeFilter::financial(),
        172_800,
        PartitionMode::Weak,
        NodeConvention::Pre,
    )
    .unwrap();
    assert!((day.total_loss() - two_day.total_loss()).abs() < 1e-9);
}
