//! `linklens entropy` — per-bucket structural-entropy loss over the
//! transaction history, with CSV, SVG chart, and growth-correlation summary.

use std::fs;

use clap::{Args, ValueEnum};
use linklens_core::entropy::{entropy_series, series_growth_fit, NodeConvention};
use linklens_core::graph::EdgeFilter;
use serde::Serialize;

use crate::emit::{ensure_out_dir, print_summary, write_json, write_params};
use crate::inputs::InputArgs;
use crate::svg::{line_chart, SeriesLine};
use crate::{CliError, CmdResult, GlobalArgs};

/// Which node set a bucket's "before" snapshot uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Nodes {
    /// Only accounts seen strictly before the bucket (series telescopes).
    Pre,
    /// Accounts seen up to and including the bucket's arrivals (loss >= 0).
    Post,
}

impl Nodes {
    fn convention(self) -> NodeConvention {
        match self {
            Nodes::Pre => NodeConvention::Pre,
            Nodes::Post => NodeConvention::Post,
        }
    }
}

#[derive(Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub inputs: InputArgs,

    /// Node-arrival convention for per-bucket snapshots.
    #[arg(long, value_enum, default_value_t = Nodes::Post)]
    pub nodes: Nodes,
}

#[derive(Serialize)]
struct Params<'a> {
    command: &'static str,
    sources: &'a [String],
    bucket_seconds: i64,
    mode: &'static str,
    nodes: &'static str,
}

#[derive(Serialize)]
struct Summary {
    bucket_seconds: i64,
    mode: &'static str,
    nodes: &'static str,
    buckets: usize,
    new_users_total: u64,
    total_loss: f64,
    final_entropy: f64,
    growth_slope: Option<f64>,
    growth_r: Option<f64>,
}

pub fn run(global: &GlobalArgs, args: &EntropyArgs) -> CmdResult {
    let resolved = args.inputs.load()?;
    let dataset = &resolved.loaded.dataset;
    if !dataset.transactions.iter().any(|tx| tx.is_ok()) {
        return Err(CliError::Data(anyhow::anyhow!(
            "degenerate input: no successful transactions to bucket"
        )));
    }

    let mode = global.mode.partition_mode();
    let series = entropy_series(
        dataset,
        &EdgeFilter::financial(),
        global.bucket,
        mode,
        args.nodes.convention(),
    )
    .map_err(|e| CliError::Data(e.into()))?;

    let out_dir = ensure_out_dir(&global.out)?;
    write_params(
        &out_dir,
        &Params {
            command: "entropy",
            sources: &resolved.sources,
            bucket_seconds: global.bucket,
            mode: mode_label(global.mode),
            nodes: nodes_label(args.nodes),
        },
    )?;

    let csv_path = out_dir.join("entropy_series.csv");
    let mut csv_bytes = Vec::new();
    series
        .write_csv(&mut csv_bytes)
        .map_err(anyhow::Error::from)?;
    fs::write(&csv_path, csv_bytes).map_err(anyhow::Error::from)?;

    let cumulative: Vec<(f64, f64)> = series
        .points
        .iter()
        .map(|p| (p.bucket_index as f64, p.cumulative_loss))
        .collect();
    let entropy: Vec<(f64, f64)> = series
        .points
        .iter()
        .map(|p| (p.bucket_index as f64, p.h_after))
        .collect();
    let chart = line_chart(
        "Structural entropy over time buckets",
        "bucket index",
        "nats",
        &[
            SeriesLine {
                label: "cumulative loss",
                color: "#c0392b",
                points: cumulative,
            },
            SeriesLine {
                label: "entropy after bucket",
                color: "#2c3e50",
                points: entropy,
            },
        ],
    );
    fs::write(out_dir.join("entropy.svg"), chart).map_err(anyhow::Error::from)?;

    let fit = series_growth_fit(&series);
    let summary = Summary {
        bucket_seconds: series.bucket_seconds,
        mode: mode_label(global.mode),
        nodes: nodes_label(args.nodes),
        buckets: series.points.len(),
        new_users_total: series.points.iter().map(|p| p.new_users).sum(),
        total_loss: series.total_loss(),
        final_entropy: series.final_entropy(),
        growth_slope: fit.r_defined.then_some(fit.slope),
        growth_r: fit.r_defined.then_some(fit.r),
    };
    write_json(&out_dir.join("summary.json"), &summary)?;
    print_summary(global.format, &summary)?;
    Ok(0)
}

fn mode_label(mode: crate::Mode) -> &'static str {
    match mode {
        crate::Mode::Weak => "weak",
        crate::Mode::Strong => "strong",
    }
}

fn nodes_label(nodes: Nodes) -> &'static str {
    match nodes {
        Nodes::Pre => "pre",
        Nodes::Post => "post",
    }
}
