//! Shared input resolution: explicit file flags or a `--bundle` directory
//! holding the standard file names.

use std::path::{Path, PathBuf};

use clap::Args;
use linklens_core::ingest::{load_dataset, FileFormat, LoadedDataset};

use crate::CliError;

/// Input locations accepted by every analysis command.
#[derive(Args, Clone, Debug, Default)]
pub struct InputArgs {
    /// Directory holding users.csv / txs_l1.csv / txs_l2.csv / follows.csv;
    /// individually present files are picked up, explicit flags win.
    #[arg(long)]
    pub bundle: Option<PathBuf>,

    /// User profile table (users.csv or .jsonl).
    #[arg(long)]
    pub users: Option<PathBuf>,

    /// Base-layer transaction export (txs_l1.csv or .jsonl).
    #[arg(long = "txs-l1")]
    pub txs_l1: Option<PathBuf>,

    /// Social-layer transaction export (txs_l2.csv or .jsonl).
    #[arg(long = "txs-l2")]
    pub txs_l2: Option<PathBuf>,

    /// Holding/declared-list edge table (follows.csv).
    #[arg(long)]
    pub follows: Option<PathBuf>,
}

/// A resolved dataset plus provenance notes for the run summary.
pub struct ResolvedInputs {
    pub loaded: LoadedDataset,
    /// Paths actually read, in users/l1/l2/follows order.
    pub sources: Vec<String>,
    /// Human-readable remarks (fallbacks, absent optional files).
    pub notes: Vec<String>,
}

fn bundle_file(dir: &Path, name: &str) -> Option<PathBuf> {
    let candidate = dir.join(name);
    candidate.is_file().then_some(candidate)
}

fn format_of(path: &Path) -> Result<FileFormat, CliError> {
    FileFormat::from_path(path).ok_or_else(|| {
        CliError::Usage(format!(
            "cannot infer a file format from {:?}: expected a .csv or .jsonl extension",
            path
        ))
    })
}

impl InputArgs {
    /// Resolve flags and bundle directory into concrete paths, then load.
    pub fn load(&self) -> Result<ResolvedInputs, CliError> {
        let mut users = self.users.clone();
        let mut txs_l1 = self.txs_l1.clone();
        let mut txs_l2 = self.txs_l2.clone();
        let mut follows = self.follows.clone();
        if let Some(dir) = &self.bundle {
            if !dir.is_dir() {
                return Err(CliError::Usage(format!(
                    "--bundle directory {dir:?} does not exist"
                )));
            }
            users = users.or_else(|| bundle_file(dir, "users.csv"));
            txs_l1 = txs_l1.or_else(|| bundle_file(dir, "txs_l1.csv"));
            txs_l2 = txs_l2.or_else(|| bundle_file(dir, "txs_l2.csv"));
            follows = follows.or_else(|| bundle_file(dir, "follows.csv"));
        }
        if txs_l1.is_none() && txs_l2.is_none() {
            return Err(CliError::Usage(
                "no transaction input: pass --txs-l1/--txs-l2 or --bundle DIR".into(),
            ));
        }

        let mut notes = Vec::new();
        if users.is_none() {
            notes.push("no user table: profile-derived sections unavailable".to_string());
        }
        if txs_l1.is_none() {
            notes.push(
                "no base-layer transactions: cross-layer scenarios S2/S3 unavailable".to_string(),
            );
        }
        if follows.is_none() {
            notes.push(
                "no follows file: holding relation will be reconstructed from share trades"
                    .to_string(),
            );
        }

        let users_arg = match &users {
            Some(path) => Some((path.as_path(), format_of(path)?)),
            None => None,
        };
        let txs_l1_arg = match &txs_l1 {
            Some(path) => Some((path.as_path(), format_of(path)?)),
            None => None,
        };
        let txs_l2_arg = match &txs_l2 {
            Some(path) => Some((path.as_path(), format_of(path)?)),
            None => None,
        };
        let loaded = load_dataset(users_arg, txs_l1_arg, txs_l2_arg, follows.as_deref())
            .map_err(|e| CliError::Data(e.into()))?;

        let sources = [&users, &txs_l1, &txs_l2, &follows]
            .into_iter()
            .flatten()
            .map(|p| p.display().to_string())
            .collect();
        Ok(ResolvedInputs {
            loaded,
            sources,
            notes,
        })
    }
}
