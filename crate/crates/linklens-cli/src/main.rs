//! `linklens` — command-line pipelines over layered social-token ecosystems:
//! ingestion, entropy-loss series, detectors, characterization reports, and
//! synthetic dataset generation.
//!
//! Exit codes: `0` success, `1` usage error, `2` data/spec error, `3` clean
//! run with findings present (detect only). Every command writes a
//! `params.json` echo of its effective parameters next to its outputs, and
//! re-runs on identical inputs produce byte-identical files.

mod commands;
mod emit;
mod inputs;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use linklens_core::graph::PartitionMode;
use linklens_core::{DEFAULT_BUCKET_SECONDS, REGISTRATION_FLOOR_WEI};

/// Command failures carrying their process exit code.
pub enum CliError {
    /// Bad invocation: missing/contradictory arguments (exit 1).
    Usage(String),
    /// Broken input data, invalid spec, or analysis preconditions (exit 2).
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(err: E) -> Self {
        CliError::Data(err.into())
    }
}

pub type CmdResult = Result<i32, CliError>;

#[derive(Parser)]
#[command(
    name = "linklens",
    version,
    about = "Link-privacy analytics for layered social-token ecosystems"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args)]
pub struct GlobalArgs {
    /// Output directory for reports and artifacts.
    #[arg(long, global = true, env = "LINKLENS_OUT", default_value = "linklens-out")]
    pub out: PathBuf,

    /// Stdout rendering of the run summary.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Component semantics: undirected reachability or mutual reachability.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Weak)]
    pub mode: Mode,

    /// Series bucket width in seconds.
    #[arg(long, global = true, value_parser = clap::value_parser!(i64).range(1..),
          default_value_t = DEFAULT_BUCKET_SECONDS as i64)]
    pub bucket: i64,

    /// Sell-to-transfer ratio floor for subsidiary candidates.
    #[arg(long = "ratio-min", global = true, default_value_t = 5.0)]
    pub ratio_min: f64,

    /// Minimum successful sells for subsidiary candidates.
    #[arg(long = "min-sells", global = true, default_value_t = 3)]
    pub min_sells: u64,

    /// Registration funding floor in wei.
    #[arg(long = "floor-wei", global = true, value_parser = parse_u128,
          default_value_t = REGISTRATION_FLOOR_WEI)]
    pub floor_wei: u128,

    /// Seed override for synthesis.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

fn parse_u128(raw: &str) -> Result<u128, String> {
    raw.parse::<u128>().map_err(|e| e.to_string())
}

/// Stdout summary renderings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Component partition semantics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Weak,
    Strong,
}

impl Mode {
    pub fn partition_mode(self) -> PartitionMode {
        match self {
            Mode::Weak => PartitionMode::Weak,
            Mode::Strong => PartitionMode::Strong,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load explorer exports and summarize their integrity.
    Ingest(commands::ingest::IngestArgs),
    /// Compute the structural-entropy loss series over time buckets.
    Entropy(commands::entropy::EntropyArgs),
    /// Run the pattern detectors and emit findings.
    Detect(commands::detect::DetectArgs),
    /// Emit the descriptive characterization bundle.
    Report(commands::report::ReportArgs),
    /// Generate a synthetic dataset bundle from a scenario spec.
    Synth(commands::synth::SynthArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    let result = match &cli.command {
        Command::Ingest(args) => commands::ingest::run(&cli.global, args),
        Command::Entropy(args) => commands::entropy::run(&cli.global, args),
        Command::Detect(args) => commands::detect::run(&cli.global, args),
        Command::Report(args) => commands::report::run(&cli.global, args),
        Command::Synth(args) => commands::synth::run(&cli.global, args),
    };

    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Data(error)) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}
