//! Shared data model: addresses, layers, accounts, transactions, follows.
//!
//! Conventions used throughout the workspace:
//!
//! * Addresses are 20 raw bytes; the canonical text form is `0x` + 40 lowercase
//!   hex digits. Comparisons are always case-insensitive because they go
//!   through [`Address`].
//! * Monetary values are integer wei (`u128`). Decimal ether strings are
//!   converted exactly by [`crate::wei`]; no floats touch money.
//! * Timestamps are integer Unix seconds (UTC). Day bucketing is
//!   `floor(ts / 86_400)`.
//! * An account is identified by `(address, layer)`; the same address on L1
//!   and L2 is two distinct accounts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Wei per whole ether.
pub const WEI_PER_ETH: u128 = 1_000_000_000_000_000_000;

/// Seconds per UTC day; day buckets are `floor(ts / DAY_SECONDS)`.
pub const DAY_SECONDS: i64 = 86_400;

/// Default width of an entropy-series bucket (two days).
pub const DEFAULT_BUCKET_SECONDS: u64 = 172_800;

/// Minimum deposit required to register on the social layer: 0.01 ether.
pub const REGISTRATION_FLOOR_WEI: u128 = 10_000_000_000_000_000;

/// Errors raised while constructing model values from raw text.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed address {input:?}: {reason}")]
    AddressFormat { input: String, reason: String },
    #[error("malformed transaction hash {input:?}: {reason}")]
    TxHashFormat { input: String, reason: String },
    #[error("unknown layer {0:?} (expected \"l1\" or \"l2\")")]
    UnknownLayer(String),
    #[error("self-follow from {0} rejected")]
    SelfFollow(Address),
}

/// A 20-byte account address.
///
/// Ordering is bytewise, which coincides with lexicographic order of the
/// canonical lowercase hex rendering; that order is used everywhere a
/// deterministic tie-break is needed.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address([u8; 20]);

impl Address {
    /// Smallest possible address (all zero bytes), handy for range scans.
    pub const MIN: Address = Address([0x00; 20]);
    /// Largest possible address (all 0xff bytes), handy for range scans.
    pub const MAX: Address = Address([0xff; 20]);

    pub const fn from_bytes(bytes: [u8; 20]) -> Self {
        Address(bytes)
    }

    pub const fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    /// Parse any accepted spelling of an address; see [`canonicalize_address`].
    pub fn parse(raw: &str) -> Result<Self, ModelError> {
        canonicalize_address(raw)
    }
}

/// Parse an address from text, accepting an optional `0x`/`0X` prefix and any
/// mix of upper/lowercase hex digits. Exactly 40 hex digits are required.
///
/// The canonical rendering (via `Display`) is `0x` + lowercase hex, so
/// `canonicalize(render(a)) == a` for every address.
pub fn canonicalize_address(raw: &str) -> Result<Address, ModelError> {
    let trimmed = raw.trim();
    let digits = trimmed
        .strip_prefix("0x")
        .or_else(|| trimmed.strip_prefix("0X"))
        .unwrap_or(trimmed);
    if digits.len() != 40 {
        return Err(ModelError::AddressFormat {
            input: raw.to_string(),
            reason: format!("expected 40 hex digits, found {}", digits.len()),
        });
    }
    let mut bytes = [0u8; 20];
    hex::decode_to_slice(digits, &mut bytes).map_err(|e| ModelError::AddressFormat {
        input: raw.to_string(),
        reason: e.to_string(),
    })?;
    Ok(Address(bytes))
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Address {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        canonicalize_address(s)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        canonicalize_address(&raw).map_err(serde::de::Error::custom)
    }
}

/// A 32-byte transaction hash; canonical text form is `0x` + 64 lowercase hex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TxHash([u8; 32]);

impl TxHash {
    pub const fn from_bytes(bytes: [u8; 32]) -> Self {
        TxHash(bytes)
    }

    pub const fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn parse(raw: &str) -> Result<Self, ModelError> {
        let trimmed = raw.trim();
        let digits = trimmed
            .strip_prefix("0x")
            .or_else(|| trimmed.strip_prefix("0X"))
            .unwrap_or(trimmed);
        if digits.len() != 64 {
            return Err(ModelError::TxHashFormat {
                input: raw.to_string(),
                reason: format!("expected 64 hex digits, found {}", digits.len()),
            });
        }
        let mut bytes = [0u8; 32];
        hex::decode_to_slice(digits, &mut bytes).map_err(|e| ModelError::TxHashFormat {
            input: raw.to_string(),
            reason: e.to_string(),
        })?;
        Ok(TxHash(bytes))
    }
}

impl fmt::Display for TxHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for TxHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for TxHash {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TxHash::parse(s)
    }
}

impl Serialize for TxHash {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TxHash {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        TxHash::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Which chain a transaction or account lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    L1,
    L2,
}

impl Layer {
    pub fn parse(raw: &str) -> Result<Self, ModelError> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "l1" | "1" => Ok(Layer::L1),
            "l2" | "2" => Ok(Layer::L2),
            _ => Err(ModelError::UnknownLayer(raw.to_string())),
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layer::L1 => write!(f, "l1"),
            Layer::L2 => write!(f, "l2"),
        }
    }
}

/// Key that identifies an account within a dataset.
pub type AccountKey = (Address, Layer);

/// Social-platform profile metadata attached to an account.
///
/// Numeric fields that a source file omits stay `None`; they are never
/// defaulted to zero, so "no data" and "zero" remain distinguishable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocialProfile {
    /// Platform-internal user id.
    pub platform_id: String,
    pub twitter_user_id: Option<String>,
    pub twitter_username: Option<String>,
    /// Number of distinct users holding this account's token.
    pub holder_count: Option<u64>,
    /// Number of distinct tokens this account holds.
    pub holding_count: Option<u64>,
    pub watchlist_count: Option<u64>,
    pub token_supply: Option<u64>,
    /// Listed token price, in wei.
    pub display_price_wei: Option<u128>,
    /// Lifetime fees collected by this account, in wei.
    pub lifetime_fees_wei: Option<u128>,
    pub last_online: Option<i64>,
    pub last_message_time: Option<i64>,
}

/// An account observed on one layer, optionally with a platform profile.
///
/// Identity — equality, ordering, hashing — is `(address, layer)` only;
/// profile metadata and `first_seen` never affect it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Account {
    pub address: Address,
    pub layer: Layer,
    pub profile: Option<SocialProfile>,
    /// Timestamp of the first transaction touching this account, if any.
    pub first_seen: Option<i64>,
}

impl Account {
    pub fn new(address: Address, layer: Layer) -> Self {
        Account {
            address,
            layer,
            profile: None,
            first_seen: None,
        }
    }

    pub fn key(&self) -> AccountKey {
        (self.address, self.layer)
    }
}

impl PartialEq for Account {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Account {}

impl PartialOrd for Account {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Account {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl std::hash::Hash for Account {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

/// Transaction intent, mapped from the explorer's free-text `Method` column.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxMethod {
    Transfer,
    BuyShare,
    SellShare,
    /// Anything else; the original method string is preserved verbatim.
    ContractOther(String),
}

impl TxMethod {
    /// Total mapping from raw method text. Matching is case-insensitive:
    /// `"transfer"` maps to [`TxMethod::Transfer`], anything containing
    /// `"buy"` to [`TxMethod::BuyShare`], anything containing `"sell"` to
    /// [`TxMethod::SellShare`] (buy wins if both appear), and any other
    /// string is preserved as [`TxMethod::ContractOther`].
    pub fn parse(raw: &str) -> TxMethod {
        let lowered = raw.trim().to_ascii_lowercase();
        if lowered == "transfer" {
            TxMethod::Transfer
        } else if lowered.contains("buy") {
            TxMethod::BuyShare
        } else if lowered.contains("sell") {
            TxMethod::SellShare
        } else if lowered.contains("transfer") {
            TxMethod::Transfer
        } else {
            TxMethod::ContractOther(raw.trim().to_string())
        }
    }

    /// True for the two share-trade methods that define social activity.
    pub fn is_share_trade(&self) -> bool {
        matches!(self, TxMethod::BuyShare | TxMethod::SellShare)
    }
}

impl fmt::Display for TxMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TxMethod::Transfer => write!(f, "transfer"),
            TxMethod::BuyShare => write!(f, "buy_share"),
            TxMethod::SellShare => write!(f, "sell_share"),
            TxMethod::ContractOther(tag) => write!(f, "other:{tag}"),
        }
    }
}

/// Execution status of a transaction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxStatus {
    Ok,
    /// Failed execution; carries the error code or raw status text.
    Error(String),
}

impl TxStatus {
    /// Build a status from the explorer's `Status` and `ErrCode` columns.
    /// Empty, `ok`, `1`, `true`, and `success` (case-insensitive) count as
    /// success; anything else is an error, labelled by `ErrCode` when present.
    pub fn parse(status_raw: &str, err_code: &str) -> TxStatus {
        let normalized = status_raw.trim().to_ascii_lowercase();
        match normalized.as_str() {
            "" | "ok" | "1" | "true" | "success" | "none" => TxStatus::Ok,
            _ => {
                let code = err_code.trim();
                if code.is_empty() {
                    TxStatus::Error(status_raw.trim().to_string())
                } else {
                    TxStatus::Error(code.to_string())
                }
            }
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, TxStatus::Ok)
    }
}

/// One transaction row. Failed transactions are retained in datasets but are
/// excluded from graph edges and detector evidence by the consuming modules.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub tx_hash: TxHash,
    pub block_no: u64,
    pub timestamp: i64,
    pub from: Address,
    pub to: Address,
    pub value_in_wei: u128,
    pub value_out_wei: u128,
    pub fee_wei: u128,
    pub method: TxMethod,
    pub status: TxStatus,
    pub layer: Layer,
}

impl Transaction {
    pub fn is_ok(&self) -> bool {
        self.status.is_ok()
    }

    /// The amount moved by this transaction: the inbound column when present,
    /// otherwise the outbound column (exports populate one side per row).
    pub fn value_wei(&self) -> u128 {
        if self.value_in_wei > 0 {
            self.value_in_wei
        } else {
            self.value_out_wei
        }
    }

    /// UTC day bucket: `floor(timestamp / 86_400)`.
    pub fn day(&self) -> i64 {
        self.timestamp.div_euclid(DAY_SECONDS)
    }
}

/// Where a follow edge came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FollowSource {
    /// Edge derived from token holding (follower holds followee's token).
    Holding,
    /// Edge from a declared following list; not evidence of holding.
    DeclaredList,
}

impl FollowSource {
    pub fn parse(raw: &str) -> Option<FollowSource> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "holding" | "hold" => Some(FollowSource::Holding),
            "declared" | "declared_list" | "declaredlist" | "list" => {
                Some(FollowSource::DeclaredList)
            }
            _ => None,
        }
    }
}

impl fmt::Display for FollowSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FollowSource::Holding => write!(f, "holding"),
            FollowSource::DeclaredList => write!(f, "declared_list"),
        }
    }
}

/// A directed follow edge between platform users. Self-follows are invalid;
/// loaders drop and count them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FollowEdge {
    pub follower: Address,
    pub followee: Address,
    pub source: FollowSource,
}

impl FollowEdge {
    pub fn new(
        follower: Address,
        followee: Address,
        source: FollowSource,
    ) -> Result<Self, ModelError> {
        if follower == followee {
            return Err(ModelError::SelfFollow(follower));
        }
        Ok(FollowEdge {
            follower,
            followee,
            source,
        })
    }
}

/// UTC day bucket of an arbitrary timestamp.
pub fn day_of(timestamp: i64) -> i64 {
    timestamp.div_euclid(DAY_SECONDS)
}
