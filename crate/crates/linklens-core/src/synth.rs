//! Deterministic synthetic-ecosystem generator with labeled ground truth.
//!
//! A [`ScenarioSpec`] describes a background population of ordinary platform
//! users plus optional *plants*: adversarial patterns (consolidation
//! clusters, single-buy registrations, funded settlement rings, boosted
//! influencer profiles) whose identities are recorded in a [`GroundTruth`]
//! alongside the generated dataset, so detector precision and recall can be
//! measured exactly.
//!
//! Generation is fully deterministic: the only entropy source is a SplitMix64
//! stream seeded from the scenario spec, collections are iterated in stable
//! order, and transaction hashes/addresses embed a monotone counter, so equal specs
//! produce byte-identical bundles.
//!
//! Background accounts are funded from a social-layer-only faucet and then
//! trade shares among themselves; they never transfer funds out, never touch
//! planted accounts, and their funding source has no base-layer history —
//! which keeps every detector quiet on a plant-free population.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{Confidence, LinkScenario, WashAnomaly};
use crate::ingest::{assemble, Dataset};
use crate::model::{
    Account, Address, FollowEdge, FollowSource, Layer, SocialProfile, Transaction, TxHash,
    TxMethod, TxStatus, DAY_SECONDS, REGISTRATION_FLOOR_WEI, WEI_PER_ETH,
};
use crate::wei::wei_to_eth;

/// Default first day of generated history: 2023-08-12T00:00:00Z.
pub const GENESIS_TS: i64 = 1_691_798_400;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error(
        "plant {plant_id:?} needs {needed} background accounts but only {available} remain unclaimed"
    )]
    PlantOversubscribed {
        plant_id: String,
        needed: usize,
        available: usize,
    },
    #[error("invalid scenario: {0}")]
    BadSpec(String),
}

// ---------------------------------------------------------------------------
// Random stream
// ---------------------------------------------------------------------------

/// SplitMix64: a tiny, fast, well-mixed 64-bit generator.
///
/// Each step adds the golden-ratio increment `0x9e3779b97f4a7c15` to the
/// state and scrambles it with two xor-multiply rounds
/// (`0xbf58476d1ce4e5b9`, `0x94d049bb133111eb`) and a final xorshift.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, n)` via the multiply-shift reduction;
    /// `n` must be positive.
    pub fn next_range(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Uniform draw in `[lo, hi]` over a u128 span.
    pub fn next_range_u128(&mut self, lo: u128, hi: u128) -> u128 {
        debug_assert!(lo <= hi);
        let span = hi - lo + 1;
        let raw = ((self.next_u64() as u128) << 64) | self.next_u64() as u128;
        lo + raw % span
    }

    /// Uniform in `[0, 1)` with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_bool(&mut self, probability: f64) -> bool {
        self.next_f64() < probability
    }

    /// Knuth's product-of-uniforms Poisson sampler; fine for small rates.
    pub fn poisson(&mut self, lambda: f64) -> u64 {
        if lambda <= 0.0 {
            return 0;
        }
        let limit = (-lambda).exp();
        let mut k = 0u64;
        let mut product = 1.0f64;
        loop {
            product *= self.next_f64();
            if product <= limit {
                return k;
            }
            k += 1;
        }
    }

    fn fill_bytes(&mut self, buf: &mut [u8]) {
        for chunk in buf.chunks_mut(8) {
            let word = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&word[..chunk.len()]);
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario specification
// ---------------------------------------------------------------------------

/// A generation request: background population plus planted patterns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub seed: u64,
    /// Size of the account pool. Plants claim accounts from the front of the
    /// pool; the rest trade as ordinary background users.
    pub n_background_accounts: usize,
    pub n_days: u32,
    /// Expected share trades per background account per day.
    pub daily_tx_rate: f64,
    /// Inclusive `[min, max]` share-trade price range in wei.
    pub price_range_wei: (u128, u128),
    /// First day of history (Unix seconds); defaults to [`GENESIS_TS`].
    #[serde(default = "default_start_ts")]
    pub start_ts: i64,
    #[serde(default)]
    pub plants: Vec<PlantSpec>,
}

fn default_start_ts() -> i64 {
    GENESIS_TS
}

/// One planted pattern with a caller-chosen identifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: PlantKind,
}

/// The planted pattern families.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlantKind {
    /// `size` harvesting subsidiaries consolidating into one main account;
    /// `main` picks which of the `size + 1` claimed accounts receives the
    /// proceeds (default: the first).
    HunterCluster {
        size: usize,
        #[serde(default)]
        main: usize,
    },
    /// `count` accounts that each appear, buy one share, and vanish, spread
    /// uniformly over the inclusive day range.
    WashCohort { count: usize, day_range: (u32, u32) },
    /// A settlement ring (head + two settlement accounts) funded by a
    /// base-layer-active sponsor that also meets the payout target there.
    S2Linkage,
    /// `count` influencer profiles with holder counts descending from
    /// `holder_target`; they hold no planted transactions.
    KolElite { count: usize, holder_target: u64 },
}

impl PlantKind {
    fn label(&self) -> &'static str {
        match self {
            PlantKind::HunterCluster { .. } => "hunter_cluster",
            PlantKind::WashCohort { .. } => "wash_cohort",
            PlantKind::S2Linkage => "s2_linkage",
            PlantKind::KolElite { .. } => "kol_elite",
        }
    }

    fn accounts_claimed(&self) -> usize {
        match self {
            PlantKind::HunterCluster { size, .. } => size + 1,
            PlantKind::WashCohort { count, .. } => *count,
            PlantKind::S2Linkage => 3,
            PlantKind::KolElite { count, .. } => *count,
        }
    }
}

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

/// Identity of an expected consolidation finding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthHunter {
    pub main: Address,
    pub subsidiaries: Vec<Address>,
}

/// Identity of an expected wash-trading finding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthWash {
    pub address: Address,
    pub anomaly: WashAnomaly,
}

/// Identity of an expected cross-layer link.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthLink {
    pub scenario: LinkScenario,
    pub accounts: Vec<Address>,
    pub confidence: Confidence,
}

/// Expected findings for one plant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantTruth {
    pub kind: String,
    /// Every account the plant controls (claimed and generated).
    pub accounts: Vec<Address>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hunters: Vec<TruthHunter>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub wash: Vec<TruthWash>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub links: Vec<TruthLink>,
}

/// All expected findings, keyed by plant id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub plants: BTreeMap<String, PlantTruth>,
}

impl GroundTruth {
    /// Expected consolidation findings as `(main, sorted subsidiaries)`.
    pub fn all_hunters(&self) -> std::collections::BTreeSet<(Address, Vec<Address>)> {
        self.plants
            .values()
            .flat_map(|p| p.hunters.iter())
            .map(|h| (h.main, h.subsidiaries.clone()))
            .collect()
    }

    /// Expected wash findings as `(address, anomaly)`.
    pub fn all_wash(&self) -> std::collections::BTreeSet<(Address, WashAnomaly)> {
        self.plants
            .values()
            .flat_map(|p| p.wash.iter())
            .map(|w| (w.address, w.anomaly))
            .collect()
    }

    /// Expected links as `(scenario, sorted accounts)`.
    pub fn all_links(&self) -> std::collections::BTreeSet<(LinkScenario, Vec<Address>)> {
        self.plants
            .values()
            .flat_map(|p| p.links.iter())
            .map(|l| (l.scenario, l.accounts.clone()))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct StagedTx {
    ts: i64,
    seq: u32,
    layer: Layer,
    from: Address,
    to: Address,
    value_wei: u128,
    fee_wei: u128,
    method: TxMethod,
    failed: bool,
}

struct Stage {
    txs: Vec<StagedTx>,
    seq: u32,
}

impl Stage {
    fn new() -> Self {
        Stage {
            txs: Vec::new(),
            seq: 0,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        layer: Layer,
        from: Address,
        to: Address,
        method: TxMethod,
        ts: i64,
        value_wei: u128,
        fee_wei: u128,
        failed: bool,
    ) {
        self.txs.push(StagedTx {
            ts,
            seq: self.seq,
            layer,
            from,
            to,
            value_wei,
            fee_wei,
            method,
            failed,
        });
        self.seq += 1;
    }
}

fn validate(spec: &ScenarioSpec) -> Result<(), SynthError> {
    let bad = |msg: String| Err(SynthError::BadSpec(msg));
    if spec.n_days == 0 {
        return bad("n_days must be at least 1".into());
    }
    if !spec.daily_tx_rate.is_finite() || spec.daily_tx_rate < 0.0 {
        return bad(format!("daily_tx_rate must be non-negative, got {}", spec.daily_tx_rate));
    }
    if spec.daily_tx_rate > 100.0 {
        return bad(format!(
            "daily_tx_rate {} is beyond the supported range (max 100)",
            spec.daily_tx_rate
        ));
    }
    let (lo, hi) = spec.price_range_wei;
    if lo == 0 || lo > hi {
        return bad(format!("price_range_wei must satisfy 0 < min <= max, got [{lo}, {hi}]"));
    }
    let mut ids = std::collections::BTreeSet::new();
    for plant in &spec.plants {
        if plant.id.trim().is_empty() {
            return bad("plant ids must be non-empty".into());
        }
        if !ids.insert(plant.id.as_str()) {
            return bad(format!("duplicate plant id {:?}", plant.id));
        }
        match &plant.kind {
            PlantKind::HunterCluster { size, main } => {
                if *size < 2 {
                    return bad(format!(
                        "plant {:?}: a consolidation cluster needs at least 2 subsidiaries",
                        plant.id
                    ));
                }
                if *main > *size {
                    return bad(format!(
                        "plant {:?}: main index {} is out of range for {} claimed accounts",
                        plant.id,
                        main,
                        size + 1
                    ));
                }
                if spec.n_days < 3 {
                    return bad(format!(
                        "plant {:?}: hunter clusters need n_days >= 3",
                        plant.id
                    ));
                }
            }
            PlantKind::WashCohort { count, day_range } => {
                if *count == 0 {
                    return bad(format!("plant {:?}: wash cohorts need count >= 1", plant.id));
                }
                if day_range.0 > day_range.1 || day_range.1 >= spec.n_days {
                    return bad(format!(
                        "plant {:?}: day_range [{}, {}] must be ordered and within 0..{}",
                        plant.id, day_range.0, day_range.1, spec.n_days
                    ));
                }
            }
            PlantKind::S2Linkage => {
                if spec.n_days < 6 {
                    return bad(format!(
                        "plant {:?}: settlement rings need n_days >= 6",
                        plant.id
                    ));
                }
            }
            PlantKind::KolElite { count, .. } => {
                if *count == 0 {
                    return bad(format!("plant {:?}: kol_elite needs count >= 1", plant.id));
                }
            }
        }
    }
    Ok(())
}

/// Generate a dataset and its ground truth from a scenario spec.
pub fn generate(spec: &ScenarioSpec) -> Result<(Dataset, GroundTruth), SynthError> {
    validate(spec)?;
    let mut rng = SplitMix64::new(spec.seed);
    let mut address_counter: u64 = 0;
    let mut fresh_address = |rng: &mut SplitMix64| -> Address {
        address_counter += 1;
        let mut bytes = [0u8; 20];
        rng.fill_bytes(&mut bytes[..12]);
        bytes[12..].copy_from_slice(&address_counter.to_be_bytes());
        Address::from_bytes(bytes)
    };

    // The faucet funds background users on the social layer only; giving it
    // no base-layer history keeps it out of cross-layer counterparty sets.
    let faucet = fresh_address(&mut rng);
    let pool: Vec<Address> = (0..spec.n_background_accounts)
        .map(|_| fresh_address(&mut rng))
        .collect();

    // Profiles for the whole pool, drawn before any plant decisions so the
    // stream layout is easy to reason about.
    let mut profiles: Vec<SocialProfile> = Vec::with_capacity(pool.len());
    for idx in 0..pool.len() {
        let has_twitter = rng.next_bool(0.6);
        let holder_count = rng.next_range(50);
        let profile = SocialProfile {
            platform_id: format!("u{idx:06}"),
            twitter_user_id: has_twitter.then(|| format!("{}", 10_000_000 + idx as u64)),
            twitter_username: has_twitter.then(|| format!("user_{idx:06}")),
            holder_count: Some(holder_count),
            holding_count: Some(rng.next_range(20)),
            watchlist_count: Some(rng.next_range(100)),
            token_supply: Some(holder_count + 1),
            display_price_wei: Some(
                rng.next_range_u128(spec.price_range_wei.0, spec.price_range_wei.1),
            ),
            lifetime_fees_wei: Some(rng.next_range_u128(0, WEI_PER_ETH / 10)),
            last_online: Some(
                spec.start_ts + rng.next_range(spec.n_days as u64 * DAY_SECONDS as u64) as i64,
            ),
            last_message_time: None,
        };
        profiles.push(profile);
    }

    // Claim plant accounts from the front of the pool.
    let mut cursor = 0usize;
    let mut claims: Vec<(usize, usize)> = Vec::with_capacity(spec.plants.len());
    for plant in &spec.plants {
        let needed = plant.kind.accounts_claimed();
        let available = pool.len() - cursor;
        if needed > available {
            return Err(SynthError::PlantOversubscribed {
                plant_id: plant.id.clone(),
                needed,
                available,
            });
        }
        claims.push((cursor, needed));
        cursor += needed;
    }
    let backgrounds: Vec<Address> = pool[cursor..].to_vec();
    let stages_txs = spec
        .plants
        .iter()
        .any(|p| !matches!(p.kind, PlantKind::KolElite { .. }));
    if stages_txs && backgrounds.len() < 5 {
        return Err(SynthError::BadSpec(format!(
            "plants need at least 5 unclaimed background accounts as trade subjects, \
             found {}",
            backgrounds.len()
        )));
    }

    let day_ts = |day: u32, offset: i64| -> i64 {
        spec.start_ts + day as i64 * DAY_SECONDS + offset
    };
    let mut stage = Stage::new();
    let mut truth = GroundTruth::default();
    let small_fee = |rng: &mut SplitMix64| rng.next_range_u128(10_000_000_000_000, 100_000_000_000_000);
    let price = |rng: &mut SplitMix64, spec: &ScenarioSpec| {
        rng.next_range_u128(spec.price_range_wei.0, spec.price_range_wei.1)
    };

    // ---- plants -----------------------------------------------------------
    for (plant, &(start, needed)) in spec.plants.iter().zip(&claims) {
        let claimed = &pool[start..start + needed];
        match &plant.kind {
            PlantKind::HunterCluster { size, main } => {
                let main = claimed[*main];
                let subs: Vec<Address> = claimed
                    .iter()
                    .copied()
                    .filter(|&account| account != main)
                    .collect();
                let base_day = rng.next_range(spec.n_days as u64 - 2) as u32;
                for &sub in &subs {
                    // Fund first thing in the morning, trade from mid-day:
                    // registration capital always precedes the first trade.
                    stage.push(
                        Layer::L2,
                        faucet,
                        sub,
                        TxMethod::Transfer,
                        day_ts(base_day, rng.next_range(3_600) as i64),
                        rng.next_range_u128(REGISTRATION_FLOOR_WEI, WEI_PER_ETH),
                        small_fee(&mut rng),
                        false,
                    );
                    // Buy five distinct background subjects, then dump them
                    // all the next day, then consolidate the day after.
                    let mut subjects = Vec::new();
                    while subjects.len() < 5 {
                        let pick = backgrounds[rng.next_range(backgrounds.len() as u64) as usize];
                        if !subjects.contains(&pick) {
                            subjects.push(pick);
                        }
                    }
                    let mut proceeds: u128 = 0;
                    for (i, &subject) in subjects.iter().enumerate() {
                        stage.push(
                            Layer::L2,
                            sub,
                            subject,
                            TxMethod::BuyShare,
                            day_ts(base_day, 7_200 + i as i64 * 600),
                            price(&mut rng, spec),
                            small_fee(&mut rng),
                            false,
                        );
                    }
                    for (i, &subject) in subjects.iter().enumerate() {
                        let value = price(&mut rng, spec);
                        proceeds += value;
                        stage.push(
                            Layer::L2,
                            sub,
                            subject,
                            TxMethod::SellShare,
                            day_ts(base_day + 1, 7_200 + i as i64 * 600),
                            value,
                            small_fee(&mut rng),
                            false,
                        );
                    }
                    stage.push(
                        Layer::L2,
                        sub,
                        main,
                        TxMethod::Transfer,
                        day_ts(base_day + 2, 7_200 + rng.next_range(3_600) as i64),
                        proceeds,
                        small_fee(&mut rng),
                        false,
                    );
                }
                debug_assert_eq!(subs.len(), *size);
                truth.plants.insert(
                    plant.id.clone(),
                    PlantTruth {
                        kind: plant.kind.label().to_string(),
                        accounts: claimed.to_vec(),
                        hunters: vec![TruthHunter {
                            main,
                            subsidiaries: {
                                let mut s = subs.clone();
                                s.sort();
                                s
                            },
                        }],
                        wash: Vec::new(),
                        links: Vec::new(),
                    },
                );
            }
            PlantKind::WashCohort { day_range, .. } => {
                let mut wash = Vec::new();
                for &account in claimed {
                    let day =
                        day_range.0 + rng.next_range((day_range.1 - day_range.0 + 1) as u64) as u32;
                    let target = backgrounds[rng.next_range(backgrounds.len() as u64) as usize];
                    stage.push(
                        Layer::L2,
                        account,
                        target,
                        TxMethod::BuyShare,
                        day_ts(day, 7_200 + rng.next_range(79_000) as i64),
                        price(&mut rng, spec),
                        small_fee(&mut rng),
                        false,
                    );
                    wash.push(TruthWash {
                        address: account,
                        anomaly: WashAnomaly::SingleBuyOnly,
                    });
                }
                wash.sort_by_key(|w| w.address);
                truth.plants.insert(
                    plant.id.clone(),
                    PlantTruth {
                        kind: plant.kind.label().to_string(),
                        accounts: claimed.to_vec(),
                        hunters: Vec::new(),
                        wash,
                        links: Vec::new(),
                    },
                );
            }
            PlantKind::S2Linkage => {
                let (head, settle_a, settle_b) = (claimed[0], claimed[1], claimed[2]);
                let funder = fresh_address(&mut rng);
                let payout = fresh_address(&mut rng);
                let base_day = rng.next_range(spec.n_days as u64 - 5) as u32;
                // Sponsor capitalizes the whole ring before anyone trades.
                for &member in &[head, settle_a, settle_b] {
                    stage.push(
                        Layer::L2,
                        funder,
                        member,
                        TxMethod::Transfer,
                        day_ts(base_day, rng.next_range(3_600) as i64),
                        WEI_PER_ETH,
                        small_fee(&mut rng),
                        false,
                    );
                }
                // Head and second settlement account hold each other: the
                // strong tie that welds the ring together.
                stage.push(
                    Layer::L2,
                    head,
                    settle_b,
                    TxMethod::BuyShare,
                    day_ts(base_day + 1, 7_200),
                    price(&mut rng, spec),
                    small_fee(&mut rng),
                    false,
                );
                stage.push(
                    Layer::L2,
                    settle_b,
                    head,
                    TxMethod::BuyShare,
                    day_ts(base_day + 1, 7_800),
                    price(&mut rng, spec),
                    small_fee(&mut rng),
                    false,
                );
                // Harvest: 5 sells for one settlement account, 11 for the
                // other (it will make two transfers, keeping the sell ratio).
                let sell_burst = |account: Address,
                                      count: usize,
                                      stage: &mut Stage,
                                      rng: &mut SplitMix64|
                 -> u128 {
                    let mut proceeds = 0u128;
                    for i in 0..count {
                        let subject =
                            backgrounds[rng.next_range(backgrounds.len() as u64) as usize];
                        let value = price(rng, spec);
                        proceeds += value;
                        stage.push(
                            Layer::L2,
                            account,
                            subject,
                            TxMethod::SellShare,
                            day_ts(base_day + 2, 7_200 + i as i64 * 300),
                            value,
                            small_fee(rng),
                            false,
                        );
                    }
                    proceeds
                };
                let proceeds_a = sell_burst(settle_a, 5, &mut stage, &mut rng);
                let proceeds_b = sell_burst(settle_b, 11, &mut stage, &mut rng);
                stage.push(
                    Layer::L2,
                    settle_a,
                    head,
                    TxMethod::Transfer,
                    day_ts(base_day + 3, 7_200),
                    proceeds_a,
                    small_fee(&mut rng),
                    false,
                );
                stage.push(
                    Layer::L2,
                    settle_b,
                    head,
                    TxMethod::Transfer,
                    day_ts(base_day + 3, 7_800),
                    proceeds_b / 2,
                    small_fee(&mut rng),
                    false,
                );
                // Payout leaves the ring toward a base-layer-active target…
                stage.push(
                    Layer::L2,
                    settle_b,
                    payout,
                    TxMethod::Transfer,
                    day_ts(base_day + 4, 7_200),
                    proceeds_b / 4,
                    small_fee(&mut rng),
                    false,
                );
                // …and sponsor and target meet directly on the base layer.
                stage.push(
                    Layer::L1,
                    funder,
                    payout,
                    TxMethod::Transfer,
                    day_ts(base_day + 5, 7_200),
                    WEI_PER_ETH,
                    small_fee(&mut rng),
                    false,
                );
                let mut members = vec![head, settle_a, settle_b];
                members.sort();
                let mut pair = vec![funder, payout];
                pair.sort();
                let mut subsidiaries = vec![settle_a, settle_b];
                subsidiaries.sort();
                truth.plants.insert(
                    plant.id.clone(),
                    PlantTruth {
                        kind: plant.kind.label().to_string(),
                        accounts: {
                            let mut all = claimed.to_vec();
                            all.push(funder);
                            all.push(payout);
                            all.sort();
                            all
                        },
                        hunters: vec![TruthHunter {
                            main: head,
                            subsidiaries,
                        }],
                        wash: Vec::new(),
                        links: vec![
                            TruthLink {
                                scenario: LinkScenario::S1L2Cluster,
                                accounts: members,
                                confidence: Confidence::High,
                            },
                            TruthLink {
                                scenario: LinkScenario::S2L1Linkage,
                                accounts: pair,
                                confidence: Confidence::Medium,
                            },
                        ],
                    },
                );
            }
            PlantKind::KolElite { holder_target, .. } => {
                for (i, _) in claimed.iter().enumerate() {
                    let profile = &mut profiles[start + i];
                    profile.holder_count = Some(holder_target.saturating_sub(i as u64));
                    profile.token_supply = Some(holder_target.saturating_sub(i as u64) + 1);
                }
                truth.plants.insert(
                    plant.id.clone(),
                    PlantTruth {
                        kind: plant.kind.label().to_string(),
                        accounts: claimed.to_vec(),
                        hunters: Vec::new(),
                        wash: Vec::new(),
                        links: Vec::new(),
                    },
                );
            }
        }
    }

    // ---- background population ---------------------------------------------
    // Funding first: every background is capitalized on day 0, strictly
    // before the earliest possible trade slot.
    for &account in &backgrounds {
        stage.push(
            Layer::L2,
            faucet,
            account,
            TxMethod::Transfer,
            day_ts(0, rng.next_range(3_600) as i64),
            rng.next_range_u128(REGISTRATION_FLOOR_WEI, WEI_PER_ETH),
            small_fee(&mut rng),
            false,
        );
    }
    // Open-position tracker so sells only close real positions; that keeps
    // the final follow table equal to the replayed net holdings.
    let mut net: BTreeMap<(u32, u32), i64> = BTreeMap::new();
    let mut held: Vec<Vec<u32>> = vec![Vec::new(); backgrounds.len()];
    if backgrounds.len() >= 2 {
        for day in 0..spec.n_days {
            // Buys dominate early, sells catch up as the ecosystem ages.
            let buy_probability = 0.7 - 0.4 * (day as f64 / spec.n_days.max(1) as f64);
            for me in 0..backgrounds.len() {
                let trades = rng.poisson(spec.daily_tx_rate);
                for _ in 0..trades {
                    let offset = 7_200 + rng.next_range(79_000) as i64;
                    let ts = day_ts(day, offset);
                    let buy = rng.next_bool(buy_probability) || held[me].is_empty();
                    if buy {
                        let r = rng.next_range(backgrounds.len() as u64 - 1) as usize;
                        let partner = if r < me { r } else { r + 1 };
                        let key = (me as u32, partner as u32);
                        let balance = net.entry(key).or_insert(0);
                        *balance += 1;
                        if *balance == 1 {
                            held[me].push(partner as u32);
                        }
                        stage.push(
                            Layer::L2,
                            backgrounds[me],
                            backgrounds[partner],
                            TxMethod::BuyShare,
                            ts,
                            price(&mut rng, spec),
                            small_fee(&mut rng),
                            false,
                        );
                    } else {
                        let slot = rng.next_range(held[me].len() as u64) as usize;
                        let partner = held[me][slot];
                        let key = (me as u32, partner);
                        let balance = net.get_mut(&key).expect("held implies open position");
                        *balance -= 1;
                        if *balance == 0 {
                            held[me].swap_remove(slot);
                        }
                        stage.push(
                            Layer::L2,
                            backgrounds[me],
                            backgrounds[partner as usize],
                            TxMethod::SellShare,
                            ts,
                            price(&mut rng, spec),
                            small_fee(&mut rng),
                            false,
                        );
                    }
                }
                // Light texture: occasional unrelated contract calls and
                // failed trades, confined to the background population.
                if rng.next_bool(0.02) {
                    let r = rng.next_range(backgrounds.len() as u64 - 1) as usize;
                    let partner = if r < me { r } else { r + 1 };
                    stage.push(
                        Layer::L2,
                        backgrounds[me],
                        backgrounds[partner],
                        TxMethod::ContractOther("Approve".to_string()),
                        day_ts(day, 7_000),
                        0,
                        small_fee(&mut rng),
                        false,
                    );
                }
                if rng.next_bool(0.01) {
                    let r = rng.next_range(backgrounds.len() as u64 - 1) as usize;
                    let partner = if r < me { r } else { r + 1 };
                    stage.push(
                        Layer::L2,
                        backgrounds[me],
                        backgrounds[partner],
                        TxMethod::BuyShare,
                        day_ts(day, 7_100),
                        price(&mut rng, spec),
                        small_fee(&mut rng),
                        true,
                    );
                }
            }
        }
    }

    // ---- materialize -------------------------------------------------------
    // Time-sort (staging order breaks ties), then assign block numbers and
    // counter-prefixed hashes in final order.
    stage.txs.sort_by_key(|tx| (tx.ts, tx.seq));
    let mut transactions = Vec::with_capacity(stage.txs.len());
    for (idx, staged) in stage.txs.iter().enumerate() {
        let mut hash_bytes = [0u8; 32];
        hash_bytes[..8].copy_from_slice(&(idx as u64 + 1).to_be_bytes());
        rng.fill_bytes(&mut hash_bytes[8..]);
        transactions.push(Transaction {
            tx_hash: TxHash::from_bytes(hash_bytes),
            block_no: 1_000_000 + idx as u64,
            timestamp: staged.ts,
            from: staged.from,
            to: staged.to,
            value_in_wei: staged.value_wei,
            value_out_wei: 0,
            fee_wei: staged.fee_wei,
            method: staged.method.clone(),
            status: if staged.failed {
                TxStatus::Error("reverted".to_string())
            } else {
                TxStatus::Ok
            },
            layer: staged.layer,
        });
    }

    // Follow table: holding edges mirror the final net-positive positions.
    let mut position: BTreeMap<(Address, Address), i64> = BTreeMap::new();
    for tx in &transactions {
        if !tx.is_ok() {
            continue;
        }
        match tx.method {
            TxMethod::BuyShare => *position.entry((tx.from, tx.to)).or_insert(0) += 1,
            TxMethod::SellShare => *position.entry((tx.from, tx.to)).or_insert(0) -= 1,
            _ => {}
        }
    }
    let follows: Vec<FollowEdge> = position
        .iter()
        .filter(|&(_, &balance)| balance > 0)
        .map(|(&(holder, subject), _)| FollowEdge {
            follower: holder,
            followee: subject,
            source: FollowSource::Holding,
        })
        .collect();

    let accounts: Vec<Account> = pool
        .iter()
        .zip(profiles)
        .map(|(&address, profile)| Account {
            address,
            layer: Layer::L2,
            profile: Some(profile),
            first_seen: None,
        })
        .collect();

    Ok((assemble(accounts, transactions, follows), truth))
}

// ---------------------------------------------------------------------------
// Bundle writer
// ---------------------------------------------------------------------------

/// File paths written by [`write_bundle`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BundlePaths {
    pub users: PathBuf,
    pub txs_l1: PathBuf,
    pub txs_l2: PathBuf,
    pub follows: PathBuf,
    pub ground_truth: PathBuf,
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn write_users_csv(dataset: &Dataset, path: &Path) -> io::Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    writeln!(
        out,
        "Id,Address,TwitterUserId,TwitterUsername,HolderCount,HoldingCount,WatchlistCount,\
         TokenSupply,DisplayPrice,LifetimeFeesCollectedInWei,LastOnline,LastMessageTime"
    )?;
    let opt_u64 = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    let opt_u128 = |v: Option<u128>| v.map(|x| x.to_string()).unwrap_or_default();
    let opt_i64 = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
    for account in &dataset.accounts {
        let Some(profile) = &account.profile else {
            continue;
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_escape(&profile.platform_id),
            account.address,
            csv_escape(profile.twitter_user_id.as_deref().unwrap_or("")),
            csv_escape(profile.twitter_username.as_deref().unwrap_or("")),
            opt_u64(profile.holder_count),
            opt_u64(profile.holding_count),
            opt_u64(profile.watchlist_count),
            opt_u64(profile.token_supply),
            opt_u128(profile.display_price_wei),
            opt_u128(profile.lifetime_fees_wei),
            opt_i64(profile.last_online),
            opt_i64(profile.last_message_time),
        )?;
    }
    out.flush()
}

fn method_column(method: &TxMethod) -> String {
    match method {
        TxMethod::Transfer => "Transfer".to_string(),
        TxMethod::BuyShare => "Buy_Share".to_string(),
        TxMethod::SellShare => "Sell_Share".to_string(),
        TxMethod::ContractOther(tag) => tag.clone(),
    }
}

fn write_txs_csv(dataset: &Dataset, layer: Layer, path: &Path) -> io::Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    writeln!(
        out,
        "Txhash,Blockno,UnixTimestamp,From,To,Value_IN(ETH),Value_OUT(ETH),TxnFee(ETH),\
         Method,Status,ErrCode"
    )?;
    for tx in dataset.transactions.iter().filter(|tx| tx.layer == layer) {
        let (status, errcode) = match &tx.status {
            TxStatus::Ok => ("ok", String::new()),
            TxStatus::Error(code) => ("error", code.clone()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            tx.tx_hash,
            tx.block_no,
            tx.timestamp,
            tx.from,
            tx.to,
            wei_to_eth(tx.value_in_wei),
            wei_to_eth(tx.value_out_wei),
            wei_to_eth(tx.fee_wei),
            csv_escape(&method_column(&tx.method)),
            status,
            csv_escape(&errcode),
        )?;
    }
    out.flush()
}

fn write_follows_csv(dataset: &Dataset, path: &Path) -> io::Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "Follower,Followee,Source")?;
    for edge in &dataset.follows {
        writeln!(out, "{},{},{}", edge.follower, edge.followee, edge.source)?;
    }
    out.flush()
}

/// Write the standard four-file explorer bundle plus `ground_truth.json`
/// into `dir` (which must exist). Output is byte-deterministic.
pub fn write_bundle(
    dataset: &Dataset,
    truth: &GroundTruth,
    dir: &Path,
) -> io::Result<BundlePaths> {
    let paths = BundlePaths {
        users: dir.join("users.csv"),
        txs_l1: dir.join("txs_l1.csv"),
        txs_l2: dir.join("txs_l2.csv"),
        follows: dir.join("follows.csv"),
        ground_truth: dir.join("ground_truth.json"),
    };
    write_users_csv(dataset, &paths.users)?;
    write_txs_csv(dataset, Layer::L1, &paths.txs_l1)?;
    write_txs_csv(dataset, Layer::L2, &paths.txs_l2)?;
    write_follows_csv(dataset, &paths.follows)?;
    let mut json = serde_json::to_string_pretty(truth).map_err(io::Error::other)?;
    json.push('\n');
    let mut file = fs::File::create(&paths.ground_truth)?;
    file.write_all(json.as_bytes())?;
    Ok(paths)
}
