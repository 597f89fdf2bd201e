//! Loading explorer-style dumps into a typed [`Dataset`].
//!
//! Three file kinds are understood:
//!
//! * **users** — platform profile rows (`id`, `address`, `twitterUsername`, …);
//! * **transactions** — explorer rows (`Txhash`, `Blockno`, `UnixTimestamp`,
//!   `From`, `To`, `Value_IN(ETH)`, `Value_OUT(ETH)`, `TxnFee(ETH)`, `Method`,
//!   `Status`, `ErrCode`), one file per layer;
//! * **follows** — `follower,followee,source` rows.
//!
//! Users and transactions load from CSV (RFC 4180, with header) or JSONL;
//! header/key matching is case-insensitive and unknown columns are ignored.
//! Malformed rows are collected as [`RowError`]s and never abort a load;
//! schema-level problems (missing mandatory column, duplicate transaction
//! hash) abort with [`IngestError`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    canonicalize_address, Account, AccountKey, Address, FollowEdge, FollowSource, Layer,
    SocialProfile, Transaction, TxHash, TxMethod, TxStatus,
};
use crate::wei::eth_to_wei;

/// On-disk encodings accepted by the loaders.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    Jsonl,
}

impl FileFormat {
    /// Guess a format from a file extension (`.csv` / `.jsonl` / `.ndjson`).
    pub fn from_path(path: &Path) -> Option<FileFormat> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("csv") => Some(FileFormat::Csv),
            Some("jsonl") | Some("ndjson") | Some("json") => Some(FileFormat::Jsonl),
            _ => None,
        }
    }
}

/// One rejected input row: 1-based line (or record) number plus the reason.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

/// Successful load: parsed records plus per-row errors for rejects.
#[derive(Debug, Default)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub errors: Vec<RowError>,
}

/// Result of loading a follows file, with drop accounting.
#[derive(Debug, Default)]
pub struct FollowsLoaded {
    pub edges: Vec<FollowEdge>,
    pub self_follows_dropped: u64,
    pub duplicates_dropped: u64,
    pub errors: Vec<RowError>,
}

/// Fatal ingest problems. Row-level issues travel as [`RowError`] instead.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("missing required column {column:?} in {path}")]
    MissingColumn { path: String, column: String },
    #[error("duplicate transaction hash {hash} (rows {first_line} and {second_line})")]
    DuplicateTxHash {
        hash: String,
        first_line: u64,
        second_line: u64,
    },
}

/// Provenance and shape metadata carried alongside a [`Dataset`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DatasetMeta {
    /// Source descriptors, e.g. file paths; filled by the caller.
    pub sources: Vec<String>,
    pub account_rows: u64,
    pub transaction_rows: u64,
    pub follow_rows: u64,
    /// Accounts created to close referential gaps (tx/follow endpoints that
    /// had no user row).
    pub auto_created_accounts: u64,
    /// Duplicate `(address, layer)` user rows collapsed during assembly.
    pub duplicate_accounts_merged: u64,
    pub min_timestamp: Option<i64>,
    pub max_timestamp: Option<i64>,
}

/// A fully assembled corpus: accounts, transactions, follows, metadata.
///
/// Invariants established by [`assemble`]:
/// * `accounts` is sorted by `(address, layer)` and free of duplicates;
/// * `transactions` is sorted by `(block_no, tx_hash)`;
/// * every transaction endpoint has an account on the transaction's layer and
///   every follow endpoint has an L2 account (auto-created when absent);
/// * `follows` is sorted and deduplicated;
/// * `Account::first_seen` is the timestamp of the earliest transaction
///   touching the account, when one exists.
#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub accounts: Vec<Account>,
    pub transactions: Vec<Transaction>,
    pub follows: Vec<FollowEdge>,
    pub meta: DatasetMeta,
}

impl Dataset {
    /// Index of the account `(address, layer)` in `accounts`, via binary
    /// search over the canonical ordering.
    pub fn account_index(&self, address: Address, layer: Layer) -> Option<usize> {
        self.accounts
            .binary_search_by(|a| a.key().cmp(&(address, layer)))
            .ok()
    }

    pub fn account(&self, address: Address, layer: Layer) -> Option<&Account> {
        self.account_index(address, layer).map(|i| &self.accounts[i])
    }

    /// `[min, max]` timestamp span over all transactions, if any exist.
    pub fn time_span(&self) -> Option<(i64, i64)> {
        match (self.meta.min_timestamp, self.meta.max_timestamp) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.accounts.is_empty() && self.transactions.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Row access shared by the CSV and JSONL paths
// ---------------------------------------------------------------------------

/// A parsed input row: lowercase column name → raw text value.
struct RawRow {
    line: u64,
    fields: HashMap<String, String>,
}

impl RawRow {
    fn get(&self, key: &str) -> Option<&str> {
        self.fields.get(key).map(|s| s.as_str())
    }

    /// Field that may legitimately be absent or blank.
    fn optional(&self, key: &str) -> Option<&str> {
        self.get(key).map(str::trim).filter(|s| !s.is_empty())
    }
}

/// Read all rows of a CSV or JSONL file into case-insensitive field maps.
/// `mandatory` columns must exist in the header (CSV) — JSONL objects are
/// checked per-row since they carry their own keys.
fn read_rows(
    path: &Path,
    format: FileFormat,
    mandatory: &[&str],
) -> Result<(Vec<RawRow>, Vec<RowError>), IngestError> {
    match format {
        FileFormat::Csv => read_csv_rows(path, mandatory),
        FileFormat::Jsonl => read_jsonl_rows(path),
    }
}

fn read_csv_rows(
    path: &Path,
    mandatory: &[&str],
) -> Result<(Vec<RawRow>, Vec<RowError>), IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();
    for column in mandatory {
        if !headers.iter().any(|h| h == &column.to_ascii_lowercase()) {
            return Err(IngestError::MissingColumn {
                path: path.display().to_string(),
                column: (*column).to_string(),
            });
        }
    }
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        // Header is line 1; data rows start at line 2.
        let line = idx as u64 + 2;
        match record {
            Ok(record) => {
                let mut fields = HashMap::with_capacity(headers.len());
                for (h, v) in headers.iter().zip(record.iter()) {
                    fields.insert(h.clone(), v.to_string());
                }
                rows.push(RawRow { line, fields });
            }
            Err(e) => errors.push(RowError {
                line,
                message: format!("unreadable csv record: {e}"),
            }),
        }
    }
    Ok((rows, errors))
}

fn read_jsonl_rows(path: &Path) -> Result<(Vec<RawRow>, Vec<RowError>), IngestError> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<serde_json::Value>(&text) {
            Ok(serde_json::Value::Object(map)) => {
                let mut fields = HashMap::with_capacity(map.len());
                for (k, v) in map {
                    let rendered = match v {
                        serde_json::Value::String(s) => s,
                        serde_json::Value::Null => String::new(),
                        // Numbers keep their literal text (arbitrary
                        // precision), so decimal values stay exact.
                        other => other.to_string(),
                    };
                    fields.insert(k.to_ascii_lowercase(), rendered);
                }
                rows.push(RawRow {
                    line: line_no,
                    fields,
                });
            }
            Ok(_) => errors.push(RowError {
                line: line_no,
                message: "expected a JSON object".to_string(),
            }),
            Err(e) => errors.push(RowError {
                line: line_no,
                message: format!("invalid json: {e}"),
            }),
        }
    }
    Ok((rows, errors))
}

fn parse_u64_field(raw: &str) -> Result<u64, String> {
    let t = raw.trim();
    // Tolerate a fractional rendering like "65.0" as long as it is integral.
    let (int, frac) = match t.split_once('.') {
        Some((i, f)) => (i, f),
        None => (t, ""),
    };
    if !frac.is_empty() && !frac.bytes().all(|b| b == b'0') {
        return Err(format!("expected an integer, found {raw:?}"));
    }
    int.parse::<u64>()
        .map_err(|e| format!("bad integer {raw:?}: {e}"))
}

fn parse_i64_field(raw: &str) -> Result<i64, String> {
    raw.trim()
        .parse::<i64>()
        .map_err(|e| format!("bad integer {raw:?}: {e}"))
}

// ---------------------------------------------------------------------------
// Users
// ---------------------------------------------------------------------------

const USER_MANDATORY: [&str; 2] = ["id", "address"];

/// Load platform user rows into L2 [`Account`]s with profiles.
///
/// Mandatory columns: `id`, `address`. Every other profile column is
/// optional; absent or blank values stay `None` rather than becoming zero.
pub fn load_users(path: &Path, format: FileFormat) -> Result<Loaded<Account>, IngestError> {
    let (rows, mut errors) = read_rows(path, format, &USER_MANDATORY)?;
    let mut records = Vec::with_capacity(rows.len());
    'rows: for row in rows {
        let fail = |message: String, errors: &mut Vec<RowError>| {
            errors.push(RowError {
                line: row.line,
                message,
            });
        };
        let Some(id) = row.optional("id") else {
            fail("missing mandatory field \"id\"".to_string(), &mut errors);
            continue;
        };
        let Some(address_raw) = row.optional("address") else {
            fail("missing mandatory field \"address\"".to_string(), &mut errors);
            continue;
        };
        let address = match canonicalize_address(address_raw) {
            Ok(a) => a,
            Err(e) => {
                fail(e.to_string(), &mut errors);
                continue;
            }
        };
        let mut profile = SocialProfile {
            platform_id: id.to_string(),
            twitter_user_id: row.optional("twitteruserid").map(str::to_string),
            twitter_username: row.optional("twitterusername").map(str::to_string),
            ..SocialProfile::default()
        };
        // (field, setter) table for the optional counters.
        let counters: [(&str, &mut Option<u64>); 4] = [
            ("holdercount", &mut profile.holder_count),
            ("holdingcount", &mut profile.holding_count),
            ("watchlistcount", &mut profile.watchlist_count),
            ("tokensupply", &mut profile.token_supply),
        ];
        for (key, slot) in counters {
            if let Some(raw) = row.optional(key) {
                match parse_u64_field(raw) {
                    Ok(v) => *slot = Some(v),
                    Err(msg) => {
                        fail(format!("column {key:?}: {msg}"), &mut errors);
                        continue 'rows;
                    }
                }
            }
        }
        for (key, slot) in [
            ("displayprice", &mut profile.display_price_wei),
            ("lifetimefeescollectedinwei", &mut profile.lifetime_fees_wei),
        ] {
            if let Some(raw) = row.optional(key) {
                match raw.trim().parse::<u128>() {
                    Ok(v) => *slot = Some(v),
                    Err(e) => {
                        fail(format!("column {key:?}: bad wei integer {raw:?}: {e}"), &mut errors);
                        continue 'rows;
                    }
                }
            }
        }
        for (key, slot) in [
            ("lastonline", &mut profile.last_online),
            ("lastmessagetime", &mut profile.last_message_time),
        ] {
            if let Some(raw) = row.optional(key) {
                match parse_i64_field(raw) {
                    Ok(v) => *slot = Some(v),
                    Err(msg) => {
                        fail(format!("column {key:?}: {msg}"), &mut errors);
                        continue 'rows;
                    }
                }
            }
        }
        records.push(Account {
            address,
            layer: Layer::L2,
            profile: Some(profile),
            first_seen: None,
        });
    }
    Ok(Loaded { records, errors })
}

// ---------------------------------------------------------------------------
// Transactions
// ---------------------------------------------------------------------------

const TX_MANDATORY: [&str; 11] = [
    "txhash",
    "blockno",
    "unixtimestamp",
    "from",
    "to",
    "value_in(eth)",
    "value_out(eth)",
    "txnfee(eth)",
    "method",
    "status",
    "errcode",
];

/// Load one layer's transaction file.
///
/// Ether-denominated columns are scaled to wei exactly. Rows with negative or
/// malformed values, bad addresses, or bad timestamps become [`RowError`]s.
/// A duplicate `Txhash` within the file is an integrity error and aborts.
pub fn load_transactions(
    path: &Path,
    format: FileFormat,
    layer: Layer,
) -> Result<Loaded<Transaction>, IngestError> {
    let (rows, mut errors) = read_rows(path, format, &TX_MANDATORY)?;
    let mut records: Vec<Transaction> = Vec::with_capacity(rows.len());
    let mut seen: HashMap<TxHash, u64> = HashMap::with_capacity(rows.len());
    for row in rows {
        match parse_transaction_row(&row, layer) {
            Ok(tx) => {
                if let Some(first_line) = seen.get(&tx.tx_hash) {
                    return Err(IngestError::DuplicateTxHash {
                        hash: tx.tx_hash.to_string(),
                        first_line: *first_line,
                        second_line: row.line,
                    });
                }
                seen.insert(tx.tx_hash, row.line);
                records.push(tx);
            }
            Err(message) => errors.push(RowError {
                line: row.line,
                message,
            }),
        }
    }
    Ok(Loaded { records, errors })
}

fn parse_transaction_row(row: &RawRow, layer: Layer) -> Result<Transaction, String> {
    let require = |key: &str| -> Result<&str, String> {
        row.optional(key)
            .ok_or_else(|| format!("missing mandatory field {key:?}"))
    };
    let tx_hash = TxHash::parse(require("txhash")?).map_err(|e| e.to_string())?;
    let block_no = parse_u64_field(require("blockno")?)?;
    let timestamp = parse_i64_field(require("unixtimestamp")?)?;
    let from = canonicalize_address(require("from")?).map_err(|e| e.to_string())?;
    let to = canonicalize_address(require("to")?).map_err(|e| e.to_string())?;
    let value_in_wei = eth_to_wei(row.get("value_in(eth)").unwrap_or(""))
        .map_err(|e| format!("column \"Value_IN(ETH)\": {e}"))?;
    let value_out_wei = eth_to_wei(row.get("value_out(eth)").unwrap_or(""))
        .map_err(|e| format!("column \"Value_OUT(ETH)\": {e}"))?;
    let fee_wei = eth_to_wei(row.get("txnfee(eth)").unwrap_or(""))
        .map_err(|e| format!("column \"TxnFee(ETH)\": {e}"))?;
    let method = TxMethod::parse(row.get("method").unwrap_or(""));
    let status = TxStatus::parse(
        row.get("status").unwrap_or(""),
        row.get("errcode").unwrap_or(""),
    );
    Ok(Transaction {
        tx_hash,
        block_no,
        timestamp,
        from,
        to,
        value_in_wei,
        value_out_wei,
        fee_wei,
        method,
        status,
        layer,
    })
}

// ---------------------------------------------------------------------------
// Follows
// ---------------------------------------------------------------------------

const FOLLOW_MANDATORY: [&str; 3] = ["follower", "followee", "source"];

/// Load a `follower,followee,source` CSV. Self-follows are dropped and
/// counted, duplicate edges deduplicated, unknown source tags rejected
/// per-row.
pub fn load_follows(path: &Path) -> Result<FollowsLoaded, IngestError> {
    let (rows, mut errors) = read_csv_rows(path, &FOLLOW_MANDATORY)?;
    let mut out = FollowsLoaded::default();
    let mut seen: BTreeSet<FollowEdge> = BTreeSet::new();
    for row in rows {
        let parsed = (|| -> Result<FollowEdge, String> {
            let follower = canonicalize_address(
                row.optional("follower")
                    .ok_or_else(|| "missing mandatory field \"follower\"".to_string())?,
            )
            .map_err(|e| e.to_string())?;
            let followee = canonicalize_address(
                row.optional("followee")
                    .ok_or_else(|| "missing mandatory field \"followee\"".to_string())?,
            )
            .map_err(|e| e.to_string())?;
            let source_raw = row
                .optional("source")
                .ok_or_else(|| "missing mandatory field \"source\"".to_string())?;
            let source = FollowSource::parse(source_raw)
                .ok_or_else(|| format!("unknown follow source {source_raw:?}"))?;
            Ok(FollowEdge {
                follower,
                followee,
                source,
            })
        })();
        match parsed {
            Ok(edge) if edge.follower == edge.followee => {
                out.self_follows_dropped += 1;
            }
            Ok(edge) => {
                if seen.insert(edge) {
                    out.edges.push(edge);
                } else {
                    out.duplicates_dropped += 1;
                }
            }
            Err(message) => errors.push(RowError {
                line: row.line,
                message,
            }),
        }
    }
    out.edges.sort();
    out.errors = errors;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

/// Combine loaded pieces into a [`Dataset`], closing referential gaps.
///
/// Transaction endpoints gain an account on the transaction's layer, and
/// follow endpoints an L2 account, whenever no user row covered them;
/// `meta.auto_created_accounts` counts these. Duplicate `(address, layer)`
/// user rows collapse to the first profile-bearing occurrence. `first_seen`
/// is derived from the earliest transaction touching each account (any
/// status: a failed transaction still evidences the account's existence).
pub fn assemble(
    accounts: Vec<Account>,
    transactions: Vec<Transaction>,
    follows: Vec<FollowEdge>,
) -> Dataset {
    let account_rows = accounts.len() as u64;
    let transaction_rows = transactions.len() as u64;
    let follow_rows = follows.len() as u64;

    let mut by_key: BTreeMap<AccountKey, Account> = BTreeMap::new();
    let mut duplicate_accounts_merged = 0u64;
    for account in accounts {
        match by_key.entry(account.key()) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(account);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                duplicate_accounts_merged += 1;
                // Keep the first row, except that a later profile fills a
                // profile-less placeholder.
                if slot.get().profile.is_none() && account.profile.is_some() {
                    slot.get_mut().profile = account.profile;
                }
            }
        }
    }

    let mut auto_created = 0u64;
    let mut ensure_account = |by_key: &mut BTreeMap<AccountKey, Account>, key: AccountKey| {
        if !by_key.contains_key(&key) {
            by_key.insert(key, Account::new(key.0, key.1));
            auto_created += 1;
        }
    };
    for tx in &transactions {
        ensure_account(&mut by_key, (tx.from, tx.layer));
        ensure_account(&mut by_key, (tx.to, tx.layer));
    }
    for edge in &follows {
        ensure_account(&mut by_key, (edge.follower, Layer::L2));
        ensure_account(&mut by_key, (edge.followee, Layer::L2));
    }

    let mut transactions = transactions;
    transactions.sort_by(|a, b| (a.block_no, a.tx_hash).cmp(&(b.block_no, b.tx_hash)));

    let mut first_seen: BTreeMap<AccountKey, i64> = BTreeMap::new();
    let mut note = |key: AccountKey, ts: i64| {
        first_seen
            .entry(key)
            .and_modify(|cur| *cur = (*cur).min(ts))
            .or_insert(ts);
    };
    for tx in &transactions {
        note((tx.from, tx.layer), tx.timestamp);
        note((tx.to, tx.layer), tx.timestamp);
    }
    for (key, ts) in first_seen {
        if let Some(account) = by_key.get_mut(&key) {
            account.first_seen = Some(ts);
        }
    }

    let mut follows = follows;
    follows.sort();
    follows.dedup();

    let min_timestamp = transactions.iter().map(|t| t.timestamp).min();
    let max_timestamp = transactions.iter().map(|t| t.timestamp).max();

    Dataset {
        accounts: by_key.into_values().collect(),
        transactions,
        follows,
        meta: DatasetMeta {
            sources: Vec::new(),
            account_rows,
            transaction_rows,
            follow_rows,
            auto_created_accounts: auto_created,
            duplicate_accounts_merged,
            min_timestamp,
            max_timestamp,
        },
    }
}

/// Convenience wrapper: load all provided files and assemble a dataset.
/// Per-file row errors are merged (with the file name prefixed) and returned
/// alongside the dataset together with follow drop counts.
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub row_errors: Vec<(String, RowError)>,
    pub self_follows_dropped: u64,
    pub duplicate_follows_dropped: u64,
}

/// Load a full bundle from disk. `users` and `txs_l2` are required by CLI
/// convention but optional here; pass `None` to skip a piece.
pub fn load_dataset(
    users: Option<(&Path, FileFormat)>,
    txs_l1: Option<(&Path, FileFormat)>,
    txs_l2: Option<(&Path, FileFormat)>,
    follows: Option<&Path>,
) -> Result<LoadedDataset, IngestError> {
    let mut row_errors: Vec<(String, RowError)> = Vec::new();
    let mut sources: Vec<String> = Vec::new();
    let tag = |path: &Path, errors: Vec<RowError>, row_errors: &mut Vec<(String, RowError)>| {
        let name = path.display().to_string();
        for e in errors {
            row_errors.push((name.clone(), e));
        }
    };

    let mut accounts = Vec::new();
    if let Some((path, format)) = users {
        let loaded = load_users(path, format)?;
        tag(path, loaded.errors, &mut row_errors);
        accounts = loaded.records;
        sources.push(path.display().to_string());
    }
    let mut transactions = Vec::new();
    for (entry, layer) in [(txs_l1, Layer::L1), (txs_l2, Layer::L2)] {
        if let Some((path, format)) = entry {
            let loaded = load_transactions(path, format, layer)?;
            tag(path, loaded.errors, &mut row_errors);
            transactions.extend(loaded.records);
            sources.push(path.display().to_string());
        }
    }
    // The same hash may legitimately not appear across layers; enforce
    // global uniqueness as well, since downstream evidence is keyed by hash.
    let mut seen: HashMap<TxHash, ()> = HashMap::with_capacity(transactions.len());
    for tx in &transactions {
        if seen.insert(tx.tx_hash, ()).is_some() {
            return Err(IngestError::DuplicateTxHash {
                hash: tx.tx_hash.to_string(),
                first_line: 0,
                second_line: 0,
            });
        }
    }
    let mut follow_edges = Vec::new();
    let mut self_follows_dropped = 0;
    let mut duplicate_follows_dropped = 0;
    if let Some(path) = follows {
        let loaded = load_follows(path)?;
        tag(path, loaded.errors, &mut row_errors);
        follow_edges = loaded.edges;
        self_follows_dropped = loaded.self_follows_dropped;
        duplicate_follows_dropped = loaded.duplicates_dropped;
        sources.push(path.display().to_string());
    }

    let mut dataset = assemble(accounts, transactions, follow_edges);
    dataset.meta.sources = sources;
    Ok(LoadedDataset {
        dataset,
        row_errors,
        self_follows_dropped,
        duplicate_follows_dropped,
    })
}

/// Read a whole file to a string (test and tooling helper).
pub fn read_to_string(path: &Path) -> std::io::Result<String> {
    let mut buf = String::new();
    File::open(path)?.read_to_string(&mut buf)?;
    Ok(buf)
}
