//! `linklens detect` — run the bonus-hunter, wash-trading, and cross-layer
//! linkage detectors; findings stream to JSONL, exit code 3 flags hits.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::{Args, ValueEnum};
use linklens_core::detect::{
    detect_bonus_hunters, detect_wash_trading, infer_cross_layer_links, DetectorParams,
    LinkScenario,
};
use linklens_core::ties::{classify_ties, holding_relation};
use serde::Serialize;

use crate::emit::{ensure_out_dir, print_summary, write_json, write_params};
use crate::inputs::InputArgs;
use crate::{CliError, CmdResult, GlobalArgs};

/// Detector selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Hunters,
    Wash,
    Links,
    All,
}

/// Cross-layer scenario selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    S1,
    S2,
    S3,
}

impl Scenario {
    fn link_scenario(self) -> LinkScenario {
        match self {
            Scenario::S1 => LinkScenario::S1L2Cluster,
            Scenario::S2 => LinkScenario::S2L1Linkage,
            Scenario::S3 => LinkScenario::S3InterUser,
        }
    }
}

#[derive(Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub inputs: InputArgs,

    /// Which detector families to run.
    #[arg(long, value_enum, default_value_t = Which::All)]
    pub which: Which,

    /// Cross-layer scenarios to evaluate when links run.
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = [Scenario::S1, Scenario::S2, Scenario::S3])]
    pub scenarios: Vec<Scenario>,
}

#[derive(Serialize)]
struct Params<'a> {
    command: &'static str,
    sources: &'a [String],
    which: String,
    scenarios: Vec<String>,
    ratio_min: f64,
    min_sells: u64,
    min_subsidiaries: usize,
    registration_floor_wei: u128,
}

#[derive(Serialize)]
struct Summary {
    hunters: Option<usize>,
    wash_findings: Option<usize>,
    wash_windows: Option<usize>,
    links: Option<usize>,
    findings_total: usize,
    notes: Vec<String>,
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let mut file =
        fs::File::create(path).map_err(|e| CliError::Data(anyhow::anyhow!("{path:?}: {e}")))?;
    for item in items {
        let line = serde_json::to_string(item)
            .map_err(|e| CliError::Data(anyhow::anyhow!("serializing finding: {e}")))?;
        writeln!(file, "{line}").map_err(anyhow::Error::from)?;
    }
    Ok(())
}

pub fn run(global: &GlobalArgs, args: &DetectArgs) -> CmdResult {
    let resolved = args.inputs.load()?;
    let dataset = &resolved.loaded.dataset;
    let params = DetectorParams {
        ratio_min: global.ratio_min,
        min_sells: global.min_sells,
        registration_floor_wei: global.floor_wei,
        ..DetectorParams::default()
    };

    let run_hunters = matches!(args.which, Which::Hunters | Which::All);
    let run_wash = matches!(args.which, Which::Wash | Which::All);
    let run_links = matches!(args.which, Which::Links | Which::All);
    let mut scenarios: Vec<LinkScenario> = args
        .scenarios
        .iter()
        .map(|s| s.link_scenario())
        .collect();
    scenarios.sort();
    scenarios.dedup();

    let out_dir = ensure_out_dir(&global.out)?;
    write_params(
        &out_dir,
        &Params {
            command: "detect",
            sources: &resolved.sources,
            which: format!("{:?}", args.which).to_lowercase(),
            scenarios: scenarios.iter().map(|s| s.label().to_string()).collect(),
            ratio_min: params.ratio_min,
            min_sells: params.min_sells,
            min_subsidiaries: params.min_subsidiaries,
            registration_floor_wei: params.registration_floor_wei,
        },
    )?;

    // Bonus hunters feed confidence boosts into the link inference, so they
    // are computed whenever either family is requested.
    let hunters = if run_hunters || run_links {
        detect_bonus_hunters(dataset, &params)
    } else {
        Vec::new()
    };
    let mut findings_total = 0usize;
    let mut summary = Summary {
        hunters: None,
        wash_findings: None,
        wash_windows: None,
        links: None,
        findings_total: 0,
        notes: resolved.notes.clone(),
    };

    if run_hunters {
        write_jsonl(&out_dir.join("hunters.jsonl"), &hunters)?;
        summary.hunters = Some(hunters.len());
        findings_total += hunters.len();
    }

    if run_wash {
        let report = detect_wash_trading(dataset, &params);
        write_jsonl(&out_dir.join("wash.jsonl"), &report.findings)?;
        let mut days = String::from("day,new_users,flagged_new_users,flagged_fraction\n");
        for stat in &report.day_stats {
            days.push_str(&format!(
                "{},{},{},{}\n",
                stat.day, stat.new_users, stat.flagged_new_users, stat.flagged_fraction
            ));
        }
        fs::write(out_dir.join("wash_days.csv"), days).map_err(anyhow::Error::from)?;
        let mut windows =
            String::from("start_day,end_day,days,new_users,flagged_new_users\n");
        for w in &report.windows {
            windows.push_str(&format!(
                "{},{},{},{},{}\n",
                w.start_day, w.end_day, w.days, w.new_users, w.flagged_new_users
            ));
        }
        fs::write(out_dir.join("wash_windows.csv"), windows).map_err(anyhow::Error::from)?;
        summary.wash_findings = Some(report.findings.len());
        summary.wash_windows = Some(report.windows.len());
        findings_total += report.findings.len();
    }

    if run_links {
        let holds = holding_relation(dataset);
        let ties = classify_ties(&holds, 2).map_err(|e| CliError::Data(e.into()))?;
        let links = infer_cross_layer_links(dataset, &ties, &hunters, &params, &scenarios)
            .map_err(|e| CliError::Data(e.into()))?;
        write_jsonl(&out_dir.join("links.jsonl"), &links.links)?;
        summary.links = Some(links.links.len());
        findings_total += links.links.len();
    }

    summary.findings_total = findings_total;
    write_json(&out_dir.join("summary.json"), &summary)?;
    print_summary(global.format, &summary)?;
    Ok(if findings_total > 0 { 3 } else { 0 })
}
