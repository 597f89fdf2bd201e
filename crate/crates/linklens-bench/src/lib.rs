//! Shared corpus builders for the criterion benches.
//!
//! Everything here is seeded, so benchmark inputs are identical across runs
//! and machines; sizes are chosen to make per-iteration times stable without
//! turning `cargo bench` into a coffee break.

use linklens_core::ingest::Dataset;
use linklens_core::synth::{generate, GroundTruth, PlantKind, PlantSpec, ScenarioSpec, GENESIS_TS};

/// Plant-free trading population of `accounts` users over `days` days.
pub fn background_corpus(accounts: usize, days: u32, seed: u64) -> Dataset {
    let spec = ScenarioSpec {
        seed,
        n_background_accounts: accounts,
        n_days: days,
        daily_tx_rate: 0.7,
        price_range_wei: (1_000_000_000_000_000, 100_000_000_000_000_000),
        start_ts: GENESIS_TS,
        plants: Vec::new(),
    };
    generate(&spec).expect("valid benchmark spec").0
}

/// Population with every plant kind present, for detector benches.
pub fn planted_corpus(seed: u64) -> (Dataset, GroundTruth) {
    let spec = planted_spec(seed);
    generate(&spec).expect("valid benchmark spec")
}

/// The scenario spec behind [`planted_corpus`], exposed so generation itself
/// can be benchmarked.
pub fn planted_spec(seed: u64) -> ScenarioSpec {
    let mut plants: Vec<PlantSpec> = (0..4)
        .map(|i| PlantSpec {
            id: format!("hunters-{i}"),
            kind: PlantKind::HunterCluster { size: 3, main: 0 },
        })
        .collect();
    plants.push(PlantSpec {
        id: "wash".into(),
        kind: PlantKind::WashCohort {
            count: 30,
            day_range: (4, 12),
        },
    });
    plants.push(PlantSpec {
        id: "ring".into(),
        kind: PlantKind::S2Linkage,
    });
    plants.push(PlantSpec {
        id: "kols".into(),
        kind: PlantKind::KolElite {
            count: 5,
            holder_target: 12_000,
        },
    });
    ScenarioSpec {
        seed,
        n_background_accounts: 2_000,
        n_days: 20,
        daily_tx_rate: 0.7,
        price_range_wei: (1_000_000_000_000_000, 100_000_000_000_000_000),
        start_ts: GENESIS_TS,
        plants,
    }
}
