//! `linklens synth` — generate a deterministic dataset bundle plus ground
//! truth from a JSON scenario spec.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use linklens_core::synth::{generate, write_bundle, ScenarioSpec};
use linklens_core::Layer;
use serde::Serialize;

use crate::emit::{ensure_out_dir, print_summary, write_params};
use crate::{CliError, CmdResult, GlobalArgs};

#[derive(Args)]
pub struct SynthArgs {
    /// Scenario spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Serialize)]
struct Params<'a> {
    command: &'static str,
    spec_file: String,
    spec: &'a ScenarioSpec,
}

#[derive(Serialize)]
struct Summary {
    seed: u64,
    accounts: usize,
    transactions_l1: usize,
    transactions_l2: usize,
    follows: usize,
    plants: usize,
    files: Vec<String>,
}

pub fn run(global: &GlobalArgs, args: &SynthArgs) -> CmdResult {
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Data(anyhow::anyhow!("reading spec {:?}: {e}", args.spec)))?;
    let mut spec: ScenarioSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(anyhow::anyhow!("parsing spec {:?}: {e}", args.spec)))?;
    if let Some(seed) = global.seed {
        spec.seed = seed;
    }

    let (dataset, truth) = generate(&spec).map_err(|e| CliError::Data(e.into()))?;
    let out_dir = ensure_out_dir(&global.out)?;
    write_params(
        &out_dir,
        &Params {
            command: "synth",
            spec_file: args.spec.display().to_string(),
            spec: &spec,
        },
    )?;
    let paths = write_bundle(&dataset, &truth, &out_dir)
        .map_err(|e| CliError::Data(anyhow::anyhow!("writing bundle: {e}")))?;

    let summary = Summary {
        seed: spec.seed,
        accounts: dataset.accounts.len(),
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
        follows: dataset.follows.len(),
        plants: truth.plants.len(),
        files: vec![
            paths.users.display().to_string(),
            paths.txs_l1.display().to_string(),
            paths.txs_l2.display().to_string(),
            paths.follows.display().to_string(),
            paths.ground_truth.display().to_string(),
        ],
    };
    print_summary(global.format, &summary)?;
    Ok(0)
}
