//! `linklens ingest` — load explorer exports, report corpus shape and
//! integrity, and persist rejected rows for inspection.

use std::fs;
use std::io::Write;

use clap::Args;
use linklens_core::Layer;
use serde::Serialize;

use crate::emit::{ensure_out_dir, print_summary, write_json, write_params};
use crate::inputs::InputArgs;
use crate::{CliError, CmdResult, GlobalArgs};

#[derive(Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub inputs: InputArgs,
}

#[derive(Serialize)]
struct Params<'a> {
    command: &'static str,
    sources: &'a [String],
}

#[derive(Serialize)]
struct Summary {
    sources: Vec<String>,
    accounts_total: usize,
    accounts_l1: usize,
    accounts_l2: usize,
    accounts_with_profile: usize,
    auto_created_accounts: u64,
    transactions_total: usize,
    transactions_l1: usize,
    transactions_l2: usize,
    transactions_failed: usize,
    follows: usize,
    first_timestamp: Option<i64>,
    last_timestamp: Option<i64>,
    row_errors: usize,
    notes: Vec<String>,
}

pub fn run(global: &GlobalArgs, args: &IngestArgs) -> CmdResult {
    let resolved = args.inputs.load()?;
    let out_dir = ensure_out_dir(&global.out)?;
    write_params(
        &out_dir,
        &Params {
            command: "ingest",
            sources: &resolved.sources,
        },
    )?;

    let dataset = &resolved.loaded.dataset;
    let summary = Summary {
        sources: resolved.sources.clone(),
        accounts_total: dataset.accounts.len(),
        accounts_l1: dataset
            .accounts
            .iter()
            .filter(|a| a.layer == Layer::L1)
            .count(),
        accounts_l2: dataset
            .accounts
            .iter()
            .filter(|a| a.layer == Layer::L2)
            .count(),
        accounts_with_profile: dataset
            .accounts
            .iter()
            .filter(|a| a.profile.is_some())
            .count(),
        auto_created_accounts: dataset.meta.auto_created_accounts,
        transactions_total: dataset.transactions.len(),
        transactions_l1: dataset
            .transactions
            .iter()
            .filter(|tx| tx.layer == Layer::L1)
            .count(),
        transactions_l2: dataset
            .transactions
            .iter()
            .filter(|tx| tx.layer == Layer::L2)
            .count(),
        transactions_failed: dataset
            .transactions
            .iter()
            .filter(|tx| !tx.is_ok())
            .count(),
        follows: dataset.follows.len(),
        first_timestamp: dataset.meta.min_timestamp,
        last_timestamp: dataset.meta.max_timestamp,
        row_errors: resolved.loaded.row_errors.len(),
        notes: resolved.notes.clone(),
    };
    write_json(&out_dir.join("summary.json"), &summary)?;

    if !resolved.loaded.row_errors.is_empty() {
        let path = out_dir.join("row_errors.csv");
        let mut file = fs::File::create(&path)
            .map_err(|e| CliError::Data(anyhow::anyhow!("writing {path:?}: {e}")))?;
        writeln!(file, "source,line,message").map_err(anyhow::Error::from)?;
        for (source, err) in &resolved.loaded.row_errors {
            writeln!(
                file,
                "{},{},{}",
                source,
                err.line,
                err.message.replace(',', ";")
            )
            .map_err(anyhow::Error::from)?;
        }
    }

    print_summary(global.format, &summary)?;
    if summary.row_errors > 0 {
        eprintln!(
            "{} rows rejected; details in {}",
            summary.row_errors,
            out_dir.join("row_errors.csv").display()
        );
        return Ok(2);
    }
    Ok(0)
}
