//! Behavioral detectors over an assembled dataset:
//!
//! * **bonus hunters** — clusters of short-lived "subsidiary" accounts that
//!   harvest share incentives (many sells, almost no transfers) and then
//!   consolidate proceeds into a common main account;
//! * **wash trading** — registration anomalies among social-layer accounts:
//!   single-purchase throwaways and accounts that start trading without any
//!   meaningful prior funding;
//! * **cross-layer links** — pseudonym-erosion scenarios that tie social
//!   accounts to each other, and to base-layer identities, through funding
//!   and payout flows.
//!
//! All detectors are pure functions of the dataset and a [`DetectorParams`]
//! bundle, and their outputs are deterministically ordered so repeated runs
//! are byte-identical.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Datelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Dataset;
use crate::model::{
    day_of, Address, Layer, Transaction, TxHash, TxMethod, REGISTRATION_FLOOR_WEI,
};
use crate::ties::TieReport;

/// Stable rule identifiers cited in finding evidence.
pub mod rules {
    /// Multiple subsidiary accounts consolidate proceeds to one target.
    pub const SHARED_CONSOLIDATION: &str = "shared_consolidation";
    /// A funder and a payout target meet directly on the base layer.
    pub const FUNDING_PAYOUT_BRIDGE: &str = "funding_payout_bridge";
    /// Base-layer counterparties of two tied users transact directly.
    pub const COUNTERPARTY_PROXIMITY: &str = "counterparty_proximity";
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DetectError {
    #[error(
        "scenario(s) {0} require base-layer history: supply txs_l1.csv or request only S1_L2Cluster"
    )]
    MissingLayerOneData(String),
}

/// Tunable thresholds shared by all detectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetectorParams {
    /// A subsidiary must have at least `ratio_min` sells per outbound
    /// transfer.
    pub ratio_min: f64,
    /// Minimum number of subsidiaries consolidating to the same target for a
    /// cluster to be reported.
    pub min_subsidiaries: usize,
    /// Minimum sell count for a subsidiary candidate.
    pub min_sells: u64,
    /// Funding below this (in wei, strictly before the first social trade)
    /// marks a registration as underfunded.
    pub registration_floor_wei: u128,
    /// A day counts toward a wash window when more than this fraction of its
    /// new users is flagged.
    pub wash_window_threshold: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            ratio_min: 5.0,
            min_subsidiaries: 2,
            min_sells: 3,
            registration_floor_wei: REGISTRATION_FLOOR_WEI,
            wash_window_threshold: 0.5,
        }
    }
}

// ---------------------------------------------------------------------------
// Shared per-account activity index
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default)]
struct TargetStats {
    value_wei: u128,
    tx_hashes: Vec<TxHash>,
}

#[derive(Clone, Debug)]
struct CandidateStats {
    sell_count: u64,
    last_sell_ts: i64,
    first_transfer_ts: i64,
    transfer_count: u64,
    sell_tx_hashes: Vec<TxHash>,
    /// Outbound transfer recipients with per-recipient volume and hashes.
    targets: BTreeMap<Address, TargetStats>,
}

/// Successful social-layer transactions only.
fn l2_ok(dataset: &Dataset) -> impl Iterator<Item = &Transaction> {
    dataset
        .transactions
        .iter()
        .filter(|tx| tx.layer == Layer::L2 && tx.is_ok())
}

/// Accounts that look like incentive-harvesting subsidiaries: many sells,
/// very few outbound transfers, and every sell strictly before the first
/// transfer out.
fn subsidiary_candidates(
    dataset: &Dataset,
    params: &DetectorParams,
) -> BTreeMap<Address, CandidateStats> {
    #[derive(Default)]
    struct Acc {
        sells: Vec<(i64, TxHash)>,
        transfers: Vec<(i64, Address, u128, TxHash)>,
    }
    let mut per_account: BTreeMap<Address, Acc> = BTreeMap::new();
    for tx in l2_ok(dataset) {
        match tx.method {
            TxMethod::SellShare => per_account
                .entry(tx.from)
                .or_default()
                .sells
                .push((tx.timestamp, tx.tx_hash)),
            TxMethod::Transfer if tx.from != tx.to => per_account
                .entry(tx.from)
                .or_default()
                .transfers
                .push((tx.timestamp, tx.to, tx.value_wei(), tx.tx_hash)),
            _ => {}
        }
    }

    let mut candidates = BTreeMap::new();
    for (address, acc) in per_account {
        let sell_count = acc.sells.len() as u64;
        let transfer_count = acc.transfers.len() as u64;
        if sell_count < params.min_sells || transfer_count == 0 {
            continue;
        }
        if (sell_count as f64) < params.ratio_min * transfer_count.max(1) as f64 {
            continue;
        }
        let last_sell_ts = acc.sells.iter().map(|&(ts, _)| ts).max().unwrap();
        let first_transfer_ts = acc.transfers.iter().map(|&(ts, ..)| ts).min().unwrap();
        if last_sell_ts >= first_transfer_ts {
            continue;
        }
        let mut targets: BTreeMap<Address, TargetStats> = BTreeMap::new();
        for (_, to, value, hash) in &acc.transfers {
            let slot = targets.entry(*to).or_default();
            slot.value_wei += value;
            slot.tx_hashes.push(*hash);
        }
        candidates.insert(
            address,
            CandidateStats {
                sell_count,
                last_sell_ts,
                first_transfer_ts,
                transfer_count,
                sell_tx_hashes: acc.sells.into_iter().map(|(_, h)| h).collect(),
                targets,
            },
        );
    }
    candidates
}

// ---------------------------------------------------------------------------
// Bonus-hunter clusters
// ---------------------------------------------------------------------------

/// Per-subsidiary evidence attached to a hunter finding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsidiaryEvidence {
    pub address: Address,
    pub sell_count: u64,
    pub transfer_count: u64,
    pub last_sell_ts: i64,
    pub first_transfer_ts: i64,
    pub sell_tx_hashes: Vec<TxHash>,
    /// Consolidation transfers from this subsidiary to the main account.
    pub transfer_tx_hashes: Vec<TxHash>,
}

/// A consolidation cluster: one main account absorbing subsidiary proceeds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BonusHunterFinding {
    pub main: Address,
    /// Sorted by subsidiary address.
    pub subsidiaries: Vec<SubsidiaryEvidence>,
}

impl BonusHunterFinding {
    pub fn subsidiary_addresses(&self) -> Vec<Address> {
        self.subsidiaries.iter().map(|s| s.address).collect()
    }

    /// Every transaction hash cited anywhere in the finding, sorted and
    /// deduplicated.
    pub fn cited_tx_hashes(&self) -> Vec<TxHash> {
        let mut hashes: Vec<TxHash> = self
            .subsidiaries
            .iter()
            .flat_map(|s| s.sell_tx_hashes.iter().chain(&s.transfer_tx_hashes))
            .copied()
            .collect();
        hashes.sort();
        hashes.dedup();
        hashes
    }
}

/// Detect consolidation clusters.
///
/// Candidates are grouped by shared transfer recipient; each group with at
/// least `min_subsidiaries` members is resolved to a main account — the
/// common counterparty absorbing the largest total volume from the group,
/// ties broken toward the smaller address — and duplicate or strictly
/// contained groups for the same main are dropped.
pub fn detect_bonus_hunters(
    dataset: &Dataset,
    params: &DetectorParams,
) -> Vec<BonusHunterFinding> {
    let candidates = subsidiary_candidates(dataset, params);

    let mut hubs: BTreeMap<Address, BTreeSet<Address>> = BTreeMap::new();
    for (&address, stats) in &candidates {
        for &target in stats.targets.keys() {
            if target != address {
                hubs.entry(target).or_default().insert(address);
            }
        }
    }

    let mut dedup: BTreeMap<(Address, Vec<Address>), BonusHunterFinding> = BTreeMap::new();
    for subs in hubs.values() {
        if subs.len() < params.min_subsidiaries {
            continue;
        }
        // Counterparties every member transferred to.
        let mut members = subs.iter();
        let first = members.next().unwrap();
        let mut common: BTreeSet<Address> =
            candidates[first].targets.keys().copied().collect();
        for member in members {
            let theirs: BTreeSet<Address> =
                candidates[member].targets.keys().copied().collect();
            common = common.intersection(&theirs).copied().collect();
        }
        // Resolve the main: largest consolidated volume, then lower address.
        let main = common
            .iter()
            .map(|&target| {
                let total: u128 = subs
                    .iter()
                    .map(|s| candidates[s].targets[&target].value_wei)
                    .sum();
                (total, std::cmp::Reverse(target))
            })
            .max()
            .map(|(_, std::cmp::Reverse(target))| target);
        let Some(main) = main else { continue };

        let subsidiaries: Vec<SubsidiaryEvidence> = subs
            .iter()
            .map(|&address| {
                let stats = &candidates[&address];
                SubsidiaryEvidence {
                    address,
                    sell_count: stats.sell_count,
                    transfer_count: stats.transfer_count,
                    last_sell_ts: stats.last_sell_ts,
                    first_transfer_ts: stats.first_transfer_ts,
                    sell_tx_hashes: stats.sell_tx_hashes.clone(),
                    transfer_tx_hashes: stats.targets[&main].tx_hashes.clone(),
                }
            })
            .collect();
        let key = (main, subs.iter().copied().collect::<Vec<_>>());
        dedup.entry(key).or_insert(BonusHunterFinding {
            main,
            subsidiaries,
        });
    }

    // Drop groups strictly contained in a larger group with the same main.
    let findings: Vec<BonusHunterFinding> = dedup.into_values().collect();
    let mut keep = Vec::new();
    'outer: for (i, finding) in findings.iter().enumerate() {
        let mine: BTreeSet<Address> = finding.subsidiary_addresses().into_iter().collect();
        for (j, other) in findings.iter().enumerate() {
            if i == j || other.main != finding.main {
                continue;
            }
            let theirs: BTreeSet<Address> =
                other.subsidiary_addresses().into_iter().collect();
            if mine.len() < theirs.len() && mine.is_subset(&theirs) {
                continue 'outer;
            }
        }
        keep.push(finding.clone());
    }
    keep
}

/// One month of cluster activity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HunterActivityMonth {
    pub year: i32,
    pub month: u32,
    /// Clusters with at least one member transaction this month.
    pub active_clusters: u64,
    /// Successful transactions touching any cluster member.
    pub member_transactions: u64,
    /// Among active clusters, the share with fewer than 100 member
    /// transactions this month; absent when no cluster was active.
    pub under_100_fraction: Option<f64>,
}

/// Monthly activity profile of detected clusters, spanning the full range of
/// months in which any cluster member transacted (quiet months included).
pub fn hunter_activity_series(
    dataset: &Dataset,
    findings: &[BonusHunterFinding],
) -> Vec<HunterActivityMonth> {
    let member_sets: Vec<BTreeSet<Address>> = findings
        .iter()
        .map(|f| {
            let mut set: BTreeSet<Address> = f.subsidiary_addresses().into_iter().collect();
            set.insert(f.main);
            set
        })
        .collect();
    if member_sets.is_empty() {
        return Vec::new();
    }

    let mut per_month: BTreeMap<(i32, u32), Vec<u64>> = BTreeMap::new();
    for tx in dataset.transactions.iter().filter(|tx| tx.is_ok()) {
        let Some(when) = DateTime::from_timestamp(tx.timestamp, 0) else {
            continue;
        };
        let key = (when.year(), when.month());
        for (idx, members) in member_sets.iter().enumerate() {
            if members.contains(&tx.from) || members.contains(&tx.to) {
                per_month
                    .entry(key)
                    .or_insert_with(|| vec![0; member_sets.len()])[idx] += 1;
            }
        }
    }
    let (Some(&first), Some(&last)) = (per_month.keys().next(), per_month.keys().next_back())
    else {
        return Vec::new();
    };

    let mut out = Vec::new();
    let mut cursor = first;
    loop {
        let counts = per_month.get(&cursor);
        let active = counts
            .map(|c| c.iter().filter(|&&n| n > 0).count() as u64)
            .unwrap_or(0);
        let txs = counts.map(|c| c.iter().sum()).unwrap_or(0);
        let under_100 = counts.and_then(|c| {
            let active_counts: Vec<u64> = c.iter().copied().filter(|&n| n > 0).collect();
            if active_counts.is_empty() {
                None
            } else {
                let small = active_counts.iter().filter(|&&n| n < 100).count();
                Some(small as f64 / active_counts.len() as f64)
            }
        });
        out.push(HunterActivityMonth {
            year: cursor.0,
            month: cursor.1,
            active_clusters: active,
            member_transactions: txs,
            under_100_fraction: under_100,
        });
        if cursor == last {
            break;
        }
        cursor = if cursor.1 == 12 {
            (cursor.0 + 1, 1)
        } else {
            (cursor.0, cursor.1 + 1)
        };
    }
    out
}

// ---------------------------------------------------------------------------
// Wash-trading registration anomalies
// ---------------------------------------------------------------------------

/// Registration anomaly class. When both apply, the single-purchase pattern
/// wins: a one-transaction history says more than a missing deposit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WashAnomaly {
    SingleBuyOnly,
    UnderfundedRegistration,
}

/// A flagged social-layer account.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WashTradeFinding {
    pub address: Address,
    pub anomaly: WashAnomaly,
    /// Timestamp of the account's first successful share trade.
    pub first_social_ts: i64,
    /// Largest single inbound transfer strictly before the first share trade
    /// (zero when the account was never funded).
    pub registration_funding_wei: u128,
    pub tx_hashes: Vec<TxHash>,
}

/// One day of registration statistics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WashDayStat {
    /// Day index: `floor(timestamp / 86400)`.
    pub day: i64,
    pub new_users: u64,
    pub flagged_new_users: u64,
    pub flagged_fraction: f64,
}

/// A maximal run of consecutive days whose flagged fraction stays above the
/// window threshold (each day having at least one new user).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WashWindow {
    pub start_day: i64,
    pub end_day: i64,
    pub days: u64,
    pub new_users: u64,
    pub flagged_new_users: u64,
}

/// Wash-trading detector output.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct WashReport {
    pub findings: Vec<WashTradeFinding>,
    /// Days on which at least one account traded for the first time.
    pub day_stats: Vec<WashDayStat>,
    pub windows: Vec<WashWindow>,
}

/// Flag registration anomalies among accounts with share-trade activity.
pub fn detect_wash_trading(dataset: &Dataset, params: &DetectorParams) -> WashReport {
    // First successful share trade per initiating account.
    let mut first_social: BTreeMap<Address, (i64, TxHash)> = BTreeMap::new();
    for tx in l2_ok(dataset) {
        if !tx.method.is_share_trade() {
            continue;
        }
        let entry = first_social
            .entry(tx.from)
            .or_insert((tx.timestamp, tx.tx_hash));
        if tx.timestamp < entry.0 {
            *entry = (tx.timestamp, tx.tx_hash);
        }
    }

    // Full successful social-layer history touching each account.
    let mut touching: BTreeMap<Address, Vec<usize>> = BTreeMap::new();
    for (idx, tx) in dataset.transactions.iter().enumerate() {
        if tx.layer != Layer::L2 || !tx.is_ok() {
            continue;
        }
        touching.entry(tx.from).or_default().push(idx);
        if tx.to != tx.from {
            touching.entry(tx.to).or_default().push(idx);
        }
    }

    // Inbound transfers (either layer) per recipient address.
    let mut inbound: BTreeMap<Address, Vec<(i64, u128, TxHash)>> = BTreeMap::new();
    for tx in dataset.transactions.iter().filter(|tx| tx.is_ok()) {
        if tx.method == TxMethod::Transfer && tx.from != tx.to {
            inbound
                .entry(tx.to)
                .or_default()
                .push((tx.timestamp, tx.value_wei(), tx.tx_hash));
        }
    }

    let mut findings = Vec::new();
    for (&address, &(first_ts, first_hash)) in &first_social {
        let funding = inbound
            .get(&address)
            .into_iter()
            .flatten()
            .filter(|&&(ts, ..)| ts < first_ts)
            .map(|&(_, value, _)| value)
            .max()
            .unwrap_or(0);
        let history = &touching[&address];
        let single_buy = history.len() == 1 && {
            let tx = &dataset.transactions[history[0]];
            tx.from == address && tx.method == TxMethod::BuyShare
        };
        if single_buy {
            findings.push(WashTradeFinding {
                address,
                anomaly: WashAnomaly::SingleBuyOnly,
                first_social_ts: first_ts,
                registration_funding_wei: funding,
                tx_hashes: vec![first_hash],
            });
        } else if funding < params.registration_floor_wei {
            findings.push(WashTradeFinding {
                address,
                anomaly: WashAnomaly::UnderfundedRegistration,
                first_social_ts: first_ts,
                registration_funding_wei: funding,
                tx_hashes: vec![first_hash],
            });
        }
    }

    // Daily flagged fractions among first-time traders.
    let flagged: BTreeSet<Address> = findings.iter().map(|f| f.address).collect();
    let mut per_day: BTreeMap<i64, (u64, u64)> = BTreeMap::new();
    for (&address, &(first_ts, _)) in &first_social {
        let slot = per_day.entry(day_of(first_ts)).or_insert((0, 0));
        slot.0 += 1;
        if flagged.contains(&address) {
            slot.1 += 1;
        }
    }
    let day_stats: Vec<WashDayStat> = per_day
        .iter()
        .map(|(&day, &(new_users, flagged_new_users))| WashDayStat {
            day,
            new_users,
            flagged_new_users,
            flagged_fraction: flagged_new_users as f64 / new_users as f64,
        })
        .collect();

    let mut windows: Vec<WashWindow> = Vec::new();
    let mut open: Option<WashWindow> = None;
    for stat in &day_stats {
        let qualifies = stat.flagged_fraction > params.wash_window_threshold;
        match open.as_mut() {
            Some(window) if qualifies && stat.day == window.end_day + 1 => {
                window.end_day = stat.day;
                window.days += 1;
                window.new_users += stat.new_users;
                window.flagged_new_users += stat.flagged_new_users;
            }
            _ => {
                if let Some(done) = open.take() {
                    windows.push(done);
                }
                if qualifies {
                    open = Some(WashWindow {
                        start_day: stat.day,
                        end_day: stat.day,
                        days: 1,
                        new_users: stat.new_users,
                        flagged_new_users: stat.flagged_new_users,
                    });
                }
            }
        }
    }
    windows.extend(open);

    WashReport {
        findings,
        day_stats,
        windows,
    }
}

// ---------------------------------------------------------------------------
// Cross-layer linkage scenarios
// ---------------------------------------------------------------------------

/// Linkage scenario families, cheapest evidence first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkScenario {
    /// Social-layer-only clustering through shared consolidation.
    #[serde(rename = "S1_L2Cluster")]
    S1L2Cluster,
    /// Funder and payout target bridged by a direct base-layer transaction.
    #[serde(rename = "S2_L1Linkage")]
    S2L1Linkage,
    /// Tied users whose base-layer counterparties transact directly.
    #[serde(rename = "S3_InterUser")]
    S3InterUser,
}

impl LinkScenario {
    pub fn label(&self) -> &'static str {
        match self {
            LinkScenario::S1L2Cluster => "S1_L2Cluster",
            LinkScenario::S2L1Linkage => "S2_L1Linkage",
            LinkScenario::S3InterUser => "S3_InterUser",
        }
    }

    /// Whether the scenario needs base-layer transactions at all.
    pub fn needs_layer_one(&self) -> bool {
        !matches!(self, LinkScenario::S1L2Cluster)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    High,
    Medium,
    Low,
}

/// One piece of cited evidence: a rule id, the transactions it rests on, and
/// a human-readable note.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvidenceItem {
    pub rule: String,
    pub tx_hashes: Vec<TxHash>,
    pub note: String,
}

/// A single inferred link between accounts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossLayerLink {
    pub scenario: LinkScenario,
    /// Sorted, deduplicated participant addresses.
    pub accounts: Vec<Address>,
    pub confidence: Confidence,
    pub evidence: Vec<EvidenceItem>,
}

/// Output of [`infer_cross_layer_links`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LinkScenarios {
    pub requested: Vec<LinkScenario>,
    pub links: Vec<CrossLayerLink>,
}

#[derive(Clone, Debug)]
struct ConsolidationCluster {
    head: Address,
    /// All members, head included, sorted.
    members: BTreeSet<Address>,
    confidence: Confidence,
    consolidation_hashes: Vec<TxHash>,
}

/// Social-layer-only clustering: pairs of distinct-profile subsidiary
/// candidates consolidating to the same head, at least one of them strongly
/// tied to it, and the head never paying either back.
fn consolidation_clusters(
    dataset: &Dataset,
    ties: &TieReport,
    hunters: &[BonusHunterFinding],
    params: &DetectorParams,
) -> Vec<ConsolidationCluster> {
    let candidates = subsidiary_candidates(dataset, params);

    let profile_of = |address: Address| -> Option<String> {
        dataset
            .account(address, Layer::L2)
            .and_then(|a| a.profile.as_ref())
            .map(|p| p.platform_id.clone())
    };
    // Heads the social layer pays back (disqualifying reciprocity).
    let mut paid_by_head: BTreeSet<(Address, Address)> = BTreeSet::new();
    for tx in l2_ok(dataset) {
        if tx.method == TxMethod::Transfer {
            paid_by_head.insert((tx.from, tx.to));
        }
    }

    let mut per_head: BTreeMap<Address, BTreeSet<Address>> = BTreeMap::new();
    for (&address, stats) in &candidates {
        for &target in stats.targets.keys() {
            if target != address {
                per_head.entry(target).or_default().insert(address);
            }
        }
    }

    let mut clusters = Vec::new();
    for (&head, senders) in &per_head {
        let members: Vec<Address> = senders.iter().copied().collect();
        let mut linked: BTreeSet<Address> = BTreeSet::new();
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                let (e, f) = (members[i], members[j]);
                let (Some(pe), Some(pf)) = (profile_of(e), profile_of(f)) else {
                    continue;
                };
                if pe == pf {
                    continue;
                }
                if !ties.is_strong(head, e) && !ties.is_strong(head, f) {
                    continue;
                }
                if paid_by_head.contains(&(head, e)) || paid_by_head.contains(&(head, f)) {
                    continue;
                }
                linked.insert(e);
                linked.insert(f);
            }
        }
        if linked.is_empty() {
            continue;
        }
        let covered = hunters.iter().any(|finding| {
            finding.main == head && {
                let subs: BTreeSet<Address> =
                    finding.subsidiary_addresses().into_iter().collect();
                linked.is_subset(&subs)
            }
        });
        let mut consolidation_hashes: Vec<TxHash> = linked
            .iter()
            .flat_map(|member| candidates[member].targets[&head].tx_hashes.clone())
            .collect();
        consolidation_hashes.sort();
        consolidation_hashes.dedup();
        let mut all = linked;
        all.insert(head);
        clusters.push(ConsolidationCluster {
            head,
            members: all,
            confidence: if covered {
                Confidence::High
            } else {
                Confidence::Medium
            },
            consolidation_hashes,
        });
    }
    clusters
}

/// Infer cross-layer links for the requested scenarios.
///
/// `ties` should be the tie classification of the same dataset, and
/// `hunters` the bonus-hunter findings (used to raise S1 confidence).
/// Scenarios beyond S1 require base-layer transactions; requesting them
/// against a social-layer-only dataset is a capability error.
pub fn infer_cross_layer_links(
    dataset: &Dataset,
    ties: &TieReport,
    hunters: &[BonusHunterFinding],
    params: &DetectorParams,
    scenarios: &[LinkScenario],
) -> Result<LinkScenarios, DetectError> {
    let mut requested: Vec<LinkScenario> = scenarios.to_vec();
    requested.sort();
    requested.dedup();

    let has_l1 = dataset.transactions.iter().any(|tx| tx.layer == Layer::L1);
    let blocked: Vec<&str> = requested
        .iter()
        .filter(|s| s.needs_layer_one())
        .map(|s| s.label())
        .collect();
    if !blocked.is_empty() && !has_l1 {
        return Err(DetectError::MissingLayerOneData(blocked.join(", ")));
    }

    let clusters = consolidation_clusters(dataset, ties, hunters, params);

    // First successful share trade per account (funding must precede it).
    let mut first_social: BTreeMap<Address, i64> = BTreeMap::new();
    for tx in l2_ok(dataset) {
        if tx.method.is_share_trade() {
            let entry = first_social.entry(tx.from).or_insert(tx.timestamp);
            *entry = (*entry).min(tx.timestamp);
        }
    }
    // Base-layer presence and direct pair index.
    let mut l1_active: BTreeSet<Address> = BTreeSet::new();
    let mut l1_pairs: BTreeMap<(Address, Address), TxHash> = BTreeMap::new();
    for tx in dataset.transactions.iter() {
        if tx.layer != Layer::L1 || !tx.is_ok() {
            continue;
        }
        l1_active.insert(tx.from);
        l1_active.insert(tx.to);
        if tx.from != tx.to {
            let key = (tx.from.min(tx.to), tx.from.max(tx.to));
            let entry = l1_pairs.entry(key).or_insert(tx.tx_hash);
            *entry = (*entry).min(tx.tx_hash);
        }
    }
    // Successful transfers, either layer, in dataset order.
    let transfers: Vec<&Transaction> = dataset
        .transactions
        .iter()
        .filter(|tx| tx.is_ok() && tx.method == TxMethod::Transfer && tx.from != tx.to)
        .collect();

    // Funding edges: sender → recipient at/above the floor, strictly before
    // the recipient's first share trade.
    let funding_of = |recipient: Address| -> Vec<(Address, TxHash)> {
        let Some(&first_ts) = first_social.get(&recipient) else {
            return Vec::new();
        };
        transfers
            .iter()
            .filter(|tx| {
                tx.to == recipient
                    && tx.timestamp < first_ts
                    && tx.value_wei() >= params.registration_floor_wei
            })
            .map(|tx| (tx.from, tx.tx_hash))
            .collect()
    };

    let mut links: Vec<CrossLayerLink> = Vec::new();

    if requested.contains(&LinkScenario::S1L2Cluster) {
        for cluster in &clusters {
            links.push(CrossLayerLink {
                scenario: LinkScenario::S1L2Cluster,
                accounts: cluster.members.iter().copied().collect(),
                confidence: cluster.confidence,
                evidence: vec![EvidenceItem {
                    rule: rules::SHARED_CONSOLIDATION.to_string(),
                    tx_hashes: cluster.consolidation_hashes.clone(),
                    note: format!(
                        "{} settlement accounts consolidate into {}",
                        cluster.members.len() - 1,
                        cluster.head
                    ),
                }],
            });
        }
    }

    if requested.contains(&LinkScenario::S2L1Linkage) {
        let mut seen: BTreeSet<(Address, Address)> = BTreeSet::new();
        for cluster in &clusters {
            // Funders of the cluster head with base-layer presence.
            let funders: Vec<(Address, TxHash)> = funding_of(cluster.head)
                .into_iter()
                .filter(|&(a, _)| l1_active.contains(&a) && !cluster.members.contains(&a))
                .collect();
            if funders.is_empty() {
                continue;
            }
            // Payout targets of any member with base-layer presence.
            let mut payouts: BTreeMap<Address, Vec<TxHash>> = BTreeMap::new();
            for tx in &transfers {
                if cluster.members.contains(&tx.from)
                    && !cluster.members.contains(&tx.to)
                    && l1_active.contains(&tx.to)
                {
                    payouts.entry(tx.to).or_default().push(tx.tx_hash);
                }
            }
            for &(funder, funding_hash) in &funders {
                for (&target, payout_hashes) in &payouts {
                    if target == funder {
                        continue;
                    }
                    let pair = (funder.min(target), funder.max(target));
                    let Some(&bridge_hash) = l1_pairs.get(&pair) else {
                        continue;
                    };
                    if !seen.insert(pair) {
                        continue;
                    }
                    let mut hashes = vec![funding_hash];
                    hashes.extend(payout_hashes.iter().copied());
                    hashes.push(bridge_hash);
                    hashes.sort();
                    hashes.dedup();
                    links.push(CrossLayerLink {
                        scenario: LinkScenario::S2L1Linkage,
                        accounts: vec![pair.0, pair.1],
                        confidence: Confidence::Medium,
                        evidence: vec![EvidenceItem {
                            rule: rules::FUNDING_PAYOUT_BRIDGE.to_string(),
                            tx_hashes: hashes,
                            note: format!(
                                "funder {} and payout target {} of cluster {} meet on the base layer",
                                funder, target, cluster.head
                            ),
                        }],
                    });
                }
            }
        }
    }

    if requested.contains(&LinkScenario::S3InterUser) {
        // User identity: consolidation cluster when available, else the
        // account by itself.
        let mut user_of: BTreeMap<Address, usize> = BTreeMap::new();
        for (idx, cluster) in clusters.iter().enumerate() {
            for &member in &cluster.members {
                user_of.entry(member).or_insert(idx);
            }
        }
        let same_user = |a: Address, b: Address| -> bool {
            match (user_of.get(&a), user_of.get(&b)) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            }
        };
        // Base-layer counterparties per account: funders plus payout
        // recipients with base-layer presence.
        let counterparties = |account: Address| -> BTreeSet<Address> {
            let mut set: BTreeSet<Address> = funding_of(account)
                .into_iter()
                .map(|(from, _)| from)
                .filter(|c| l1_active.contains(c))
                .collect();
            for tx in &transfers {
                if tx.from == account && l1_active.contains(&tx.to) {
                    set.insert(tx.to);
                }
            }
            set.remove(&account);
            set
        };
        for &(x, y) in &ties.strong_pairs {
            if same_user(x, y) {
                continue;
            }
            let cx_set = counterparties(x);
            let cy_set = counterparties(y);
            let mut found = None;
            'search: for &cx in &cx_set {
                for &cy in &cy_set {
                    if cx == cy {
                        continue;
                    }
                    let pair = (cx.min(cy), cx.max(cy));
                    if let Some(&hash) = l1_pairs.get(&pair) {
                        found = Some((cx, cy, hash));
                        break 'search;
                    }
                }
            }
            if let Some((cx, cy, hash)) = found {
                links.push(CrossLayerLink {
                    scenario: LinkScenario::S3InterUser,
                    accounts: vec![x.min(y), x.max(y)],
                    confidence: Confidence::Low,
                    evidence: vec![EvidenceItem {
                        rule: rules::COUNTERPARTY_PROXIMITY.to_string(),
                        tx_hashes: vec![hash],
                        note: format!(
                            "base-layer counterparties {cx} and {cy} transact directly"
                        ),
                    }],
                });
            }
        }
    }

    links.sort_by(|a, b| {
        (a.scenario, &a.accounts, a.confidence).cmp(&(b.scenario, &b.accounts, b.confidence))
    });
    Ok(LinkScenarios { requested, links })
}
