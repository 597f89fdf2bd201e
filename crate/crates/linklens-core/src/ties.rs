//! Social-tie derivation and descriptive statistics.
//!
//! The primitive is the directed *holds* relation: `holds(a, b)` when account
//! `a` currently holds `b`'s token. It comes from the follow table when one
//! was exported (only `holding`-sourced rows count), and otherwise from
//! replaying successful share trades — a buy opens a position, a sell closes
//! one, and a positive net at the end of history means `a` still holds `b`.
//!
//! On top of holds, pairs are classified as:
//!
//! * **strong** — mutual holding, reported as unordered pairs;
//! * **weak** — one-directional holding, reported as ordered `(holder,
//!   subject)` edges;
//! * **indirect** — neither side holds the other, but a directed chain of
//!   holds of length ≥ 2 (bounded by `max_hops`) connects them; the witness
//!   is the smallest-addressed intermediate on the discovered chain.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Datelike};
use serde::Serialize;
use thiserror::Error;

use crate::ingest::Dataset;
use crate::model::{day_of, Address, FollowEdge, FollowSource, Layer, TxHash, TxMethod};
use crate::wei::wei_to_eth;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TieError {
    #[error("indirect-tie search needs max_hops >= 2, got {0}")]
    MaxHops(usize),
}

/// Why a holds edge exists: exported follow row, or the buy transactions
/// that opened the surviving position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "tx_hashes")]
pub enum HoldWitness {
    Declared,
    Purchases(Vec<TxHash>),
}

/// Directed holds relation: `(holder, subject) → witness`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HoldsRelation {
    pub pairs: BTreeMap<(Address, Address), HoldWitness>,
}

impl HoldsRelation {
    pub fn holds(&self, holder: Address, subject: Address) -> bool {
        self.pairs.contains_key(&(holder, subject))
    }

    pub fn witness(&self, holder: Address, subject: Address) -> Option<&HoldWitness> {
        self.pairs.get(&(holder, subject))
    }

    /// Subjects held by `holder`, ascending.
    pub fn held_by(&self, holder: Address) -> impl Iterator<Item = Address> + '_ {
        self.pairs
            .range((holder, Address::MIN)..=(holder, Address::MAX))
            .map(|(&(_, subject), _)| subject)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Build from follow edges; only `holding`-sourced rows participate.
    pub fn from_follows(follows: &[FollowEdge]) -> Self {
        let mut pairs = BTreeMap::new();
        for edge in follows {
            if edge.source == FollowSource::Holding {
                pairs.insert((edge.follower, edge.followee), HoldWitness::Declared);
            }
        }
        HoldsRelation { pairs }
    }

    /// Build by replaying successful share trades: net open positions at the
    /// end of history survive, witnessed by their buy transactions.
    pub fn from_trades(dataset: &Dataset) -> Self {
        let mut net: BTreeMap<(Address, Address), i64> = BTreeMap::new();
        let mut buys: BTreeMap<(Address, Address), Vec<TxHash>> = BTreeMap::new();
        let mut ordered: Vec<&crate::model::Transaction> = dataset
            .transactions
            .iter()
            .filter(|tx| tx.is_ok() && tx.method.is_share_trade())
            .collect();
        ordered.sort_by_key(|tx| (tx.timestamp, tx.block_no, tx.tx_hash));
        for tx in ordered {
            let key = (tx.from, tx.to);
            match tx.method {
                TxMethod::BuyShare => {
                    *net.entry(key).or_insert(0) += 1;
                    buys.entry(key).or_default().push(tx.tx_hash);
                }
                TxMethod::SellShare => {
                    *net.entry(key).or_insert(0) -= 1;
                }
                _ => unreachable!("filtered to share trades"),
            }
        }
        let mut pairs = BTreeMap::new();
        for (key, balance) in net {
            if balance > 0 {
                pairs.insert(key, HoldWitness::Purchases(buys.remove(&key).unwrap_or_default()));
            }
        }
        HoldsRelation { pairs }
    }
}

/// Derive the holds relation for a dataset: the follow table wins when it
/// exists (an export reflects final state), otherwise trades are replayed.
pub fn holding_relation(dataset: &Dataset) -> HoldsRelation {
    if !dataset.follows.is_empty() {
        HoldsRelation::from_follows(&dataset.follows)
    } else {
        HoldsRelation::from_trades(dataset)
    }
}

/// Classified ties over one holds relation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TieReport {
    /// Mutual holding, as `(min, max)` unordered pairs.
    pub strong_pairs: BTreeSet<(Address, Address)>,
    /// One-directional holding, as ordered `(holder, subject)` edges.
    pub weak_edges: BTreeSet<(Address, Address)>,
    /// Chain-connected pairs `(min, max)` with their witness intermediate.
    pub indirect_pairs: BTreeMap<(Address, Address), Address>,
}

/// Per-class tie counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TieCounts {
    pub strong: u64,
    pub weak: u64,
    pub indirect: u64,
}

impl TieCounts {
    pub fn total(&self) -> u64 {
        self.strong + self.weak + self.indirect
    }
}

impl TieReport {
    pub fn counts(&self) -> TieCounts {
        TieCounts {
            strong: self.strong_pairs.len() as u64,
            weak: self.weak_edges.len() as u64,
            indirect: self.indirect_pairs.len() as u64,
        }
    }

    pub fn is_strong(&self, a: Address, b: Address) -> bool {
        let key = (a.min(b), a.max(b));
        self.strong_pairs.contains(&key)
    }
}

/// Classify every account pair reachable through the holds relation.
///
/// `max_hops` bounds the chain length considered for indirect ties and must
/// be at least 2 (a 1-hop "chain" is just a direct edge).
pub fn classify_ties(holds: &HoldsRelation, max_hops: usize) -> Result<TieReport, TieError> {
    if max_hops < 2 {
        return Err(TieError::MaxHops(max_hops));
    }
    let mut report = TieReport::default();

    for (&(holder, subject), _) in &holds.pairs {
        if holds.holds(subject, holder) {
            report.strong_pairs.insert((holder.min(subject), holder.max(subject)));
        } else {
            report.weak_edges.insert((holder, subject));
        }
    }

    // Sorted adjacency for deterministic chain discovery.
    let mut nodes: BTreeSet<Address> = BTreeSet::new();
    for &(holder, subject) in holds.pairs.keys() {
        nodes.insert(holder);
        nodes.insert(subject);
    }
    let adjacency: BTreeMap<Address, Vec<Address>> = nodes
        .iter()
        .map(|&a| (a, holds.held_by(a).collect()))
        .collect();

    // Bounded BFS from each node; neighbors expand in ascending address
    // order, so the recorded predecessor chain prefers small intermediates.
    for &start in &nodes {
        let mut depth: HashMap<Address, usize> = HashMap::new();
        let mut pred: HashMap<Address, Address> = HashMap::new();
        let mut frontier = vec![start];
        depth.insert(start, 0);
        for d in 0..max_hops {
            let mut next = Vec::new();
            for &node in &frontier {
                for &neighbor in adjacency.get(&node).map(|v| v.as_slice()).unwrap_or(&[]) {
                    if depth.contains_key(&neighbor) {
                        continue;
                    }
                    depth.insert(neighbor, d + 1);
                    pred.insert(neighbor, node);
                    next.push(neighbor);
                }
            }
            frontier = next;
        }
        for (&end, &d) in &depth {
            if d < 2 || holds.holds(start, end) || holds.holds(end, start) {
                continue;
            }
            let key = (start.min(end), start.max(end));
            // Smallest intermediate on the discovered chain.
            let mut witness = Address::MAX;
            let mut cursor = end;
            while let Some(&p) = pred.get(&cursor) {
                if p == start {
                    break;
                }
                witness = witness.min(p);
                cursor = p;
            }
            match report.indirect_pairs.entry(key) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(witness);
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    if witness < *slot.get() {
                        slot.insert(witness);
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Tie counts within a cohort, touching it, and overall.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CohortTieStats {
    /// Both endpoints in the cohort.
    pub within: TieCounts,
    /// At least one endpoint in the cohort.
    pub touching: TieCounts,
    /// Every classified tie.
    pub all: TieCounts,
}

pub fn cohort_tie_stats(report: &TieReport, cohort: &BTreeSet<Address>) -> CohortTieStats {
    let mut stats = CohortTieStats::default();
    let mut tally = |a: Address, b: Address, pick: fn(&mut TieCounts) -> &mut u64| {
        *pick(&mut stats.all) += 1;
        let ins = cohort.contains(&a) as u8 + cohort.contains(&b) as u8;
        if ins >= 1 {
            *pick(&mut stats.touching) += 1;
        }
        if ins == 2 {
            *pick(&mut stats.within) += 1;
        }
    };
    for &(a, b) in &report.strong_pairs {
        tally(a, b, |c| &mut c.strong);
    }
    for &(a, b) in &report.weak_edges {
        tally(a, b, |c| &mut c.weak);
    }
    for &(a, b) in report.indirect_pairs.keys() {
        tally(a, b, |c| &mut c.indirect);
    }
    stats
}

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

/// One bucket of the holding-count distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoldingBucket {
    pub label: String,
    pub count: u64,
    /// Share of profiled accounts for value buckets; share of all inspected
    /// accounts for the `unknown` bucket.
    pub fraction: f64,
}

fn holding_bucket_label(count: u64) -> &'static str {
    match count {
        0 | 1 => "<2",
        3..=5 => "3-5",
        c if c > 10 => ">10",
        _ => "other",
    }
}

fn distribution_over<'a>(
    accounts: impl Iterator<Item = &'a crate::model::Account>,
) -> Vec<HoldingBucket> {
    let mut counts: BTreeMap<&'static str, u64> = BTreeMap::new();
    let mut unknown = 0u64;
    let mut known = 0u64;
    for account in accounts {
        match account.profile.as_ref().and_then(|p| p.holding_count) {
            Some(held) => {
                known += 1;
                *counts.entry(holding_bucket_label(held)).or_insert(0) += 1;
            }
            None => unknown += 1,
        }
    }
    let share = |count: u64| {
        if known == 0 {
            0.0
        } else {
            count as f64 / known as f64
        }
    };
    let mut out: Vec<HoldingBucket> = ["<2", "3-5", ">10", "other"]
        .iter()
        .map(|&label| HoldingBucket {
            label: label.to_string(),
            count: counts.get(label).copied().unwrap_or(0),
            fraction: share(counts.get(label).copied().unwrap_or(0)),
        })
        .collect();
    let total = known + unknown;
    out.push(HoldingBucket {
        label: "unknown".to_string(),
        count: unknown,
        fraction: if total == 0 { 0.0 } else { unknown as f64 / total as f64 },
    });
    out
}

/// Distribution of profile `holding_count` over the dataset's social-layer
/// accounts, in the fixed bucket order `<2`, `3-5`, `>10`, `other`, `unknown`.
pub fn token_distribution(dataset: &Dataset) -> Vec<HoldingBucket> {
    distribution_over(dataset.accounts.iter().filter(|a| a.layer == Layer::L2))
}

/// Same buckets, restricted to a cohort of social-layer addresses.
pub fn cohort_holding_distribution(
    dataset: &Dataset,
    cohort: &BTreeSet<Address>,
) -> Vec<HoldingBucket> {
    distribution_over(
        dataset
            .accounts
            .iter()
            .filter(|a| a.layer == Layer::L2 && cohort.contains(&a.address)),
    )
}

/// One calendar month of activity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MonthActivity {
    pub year: i32,
    pub month: u32,
    /// Distinct accounts appearing as sender or recipient.
    pub active_accounts: u64,
    pub transactions: u64,
}

/// Calendar-month activity timeline over *all* transactions, failures
/// included — an attempt is activity even when it reverts. Months between
/// the first and last transaction appear explicitly, zeros included.
pub fn activity_timeline(dataset: &Dataset) -> Vec<MonthActivity> {
    let mut touched: BTreeMap<(i32, u32), BTreeSet<(Address, Layer)>> = BTreeMap::new();
    let mut tx_count: BTreeMap<(i32, u32), u64> = BTreeMap::new();
    for tx in &dataset.transactions {
        let Some(when) = DateTime::from_timestamp(tx.timestamp, 0) else {
            continue;
        };
        let key = (when.year(), when.month());
        let set = touched.entry(key).or_default();
        set.insert((tx.from, tx.layer));
        set.insert((tx.to, tx.layer));
        *tx_count.entry(key).or_insert(0) += 1;
    }
    let (Some(&first), Some(&last)) = (
        tx_count.keys().next(),
        tx_count.keys().next_back(),
    ) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut cursor = first;
    loop {
        out.push(MonthActivity {
            year: cursor.0,
            month: cursor.1,
            active_accounts: touched.get(&cursor).map(|s| s.len() as u64).unwrap_or(0),
            transactions: tx_count.get(&cursor).copied().unwrap_or(0),
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

/// One day of share-trade mix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DayMix {
    /// Day index: `floor(timestamp / 86400)`.
    pub day: i64,
    pub buys: u64,
    pub sells: u64,
    /// `buys / (buys + sells)`, absent on empty days.
    pub buy_fraction: Option<f64>,
    /// Floor of the mean trade value in wei.
    pub mean_value_wei: u128,
    /// Same mean rendered as an ETH decimal string.
    pub mean_value_eth: String,
}

/// Daily buy/sell mix over successful share trades, covering the trading
/// span contiguously (quiet days appear with zero counts).
pub fn daily_buy_sell_mix(dataset: &Dataset) -> Vec<DayMix> {
    let mut per_day: BTreeMap<i64, (u64, u64, u128)> = BTreeMap::new();
    for tx in &dataset.transactions {
        if !tx.is_ok() || !tx.method.is_share_trade() {
            continue;
        }
        let slot = per_day.entry(day_of(tx.timestamp)).or_insert((0, 0, 0));
        match tx.method {
            TxMethod::BuyShare => slot.0 += 1,
            TxMethod::SellShare => slot.1 += 1,
            _ => unreachable!("filtered to share trades"),
        }
        slot.2 += tx.value_wei();
    }
    let (Some(&first), Some(&last)) = (per_day.keys().next(), per_day.keys().next_back()) else {
        return Vec::new();
    };
    (first..=last)
        .map(|day| {
            let (buys, sells, value) = per_day.get(&day).copied().unwrap_or((0, 0, 0));
            let trades = buys + sells;
            let mean = if trades == 0 { 0 } else { value / trades as u128 };
            DayMix {
                day,
                buys,
                sells,
                buy_fraction: (trades > 0).then(|| buys as f64 / trades as f64),
                mean_value_wei: mean,
                mean_value_eth: wei_to_eth(mean),
            }
        })
        .collect()
}

/// Accounts ranked by profile `holder_count`, descending, ties broken by
/// ascending address; accounts without the figure are skipped.
pub fn top_holders(dataset: &Dataset, k: usize) -> Vec<(Address, u64)> {
    let mut ranked: Vec<(Address, u64)> = dataset
        .accounts
        .iter()
        .filter(|a| a.layer == Layer::L2)
        .filter_map(|a| {
            a.profile
                .as_ref()
                .and_then(|p| p.holder_count)
                .map(|count| (a.address, count))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}
