//! Core library for `linklens`: quantifies how much link privacy a layered
//! social-token ecosystem leaks through its on-chain transaction graph.
//!
//! The pipeline is organised as small composable stages:
//!
//! * [`model`] — addresses, accounts, transactions, follow edges, and the
//!   wei/timestamp conventions every other module relies on.
//! * [`ingest`] — explorer-style CSV/JSONL loading into a typed [`ingest::Dataset`].
//! * [`graph`] — typed directed multigraphs, weak/strong component partitions,
//!   and incremental component maintenance under edge insertion.
//! * [`entropy`] — structural entropy of component-size distributions, per-bucket
//!   privacy-loss series, and loss-vs-growth correlation.
//! * [`ties`] — holding relations, weak/strong/indirect tie classification, and
//!   descriptive trading/holding statistics.
//! * [`detect`] — bonus-hunter, wash-trading, and cross-layer linkage detectors
//!   with evidence trails.
//! * [`synth`] — deterministic scenario generator that plants known patterns and
//!   emits ground truth for detector evaluation.
//!
//! Shared data types live in [`model`] and are re-exported at the crate root.

pub mod detect;
pub mod entropy;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod synth;
pub mod ties;
pub mod wei;

pub use model::{
    canonicalize_address, Account, Address, FollowEdge, FollowSource, Layer, ModelError,
    SocialProfile, Transaction, TxHash, TxMethod, TxStatus, DAY_SECONDS,
    DEFAULT_BUCKET_SECONDS, REGISTRATION_FLOOR_WEI, WEI_PER_ETH,
};
