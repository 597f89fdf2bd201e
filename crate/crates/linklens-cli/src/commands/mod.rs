//! Subcommand implementations.

pub mod detect;
pub mod entropy;
pub mod ingest;
pub mod report;
pub mod synth;
