//! `linklens report` — descriptive characterization of a corpus: top holders,
//! holding distribution, monthly activity, daily trade mix, and tie counts.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use clap::Args;
use linklens_core::ties::{
    classify_ties, daily_buy_sell_mix, holding_relation, activity_timeline, token_distribution,
    top_holders,
};
use serde::Serialize;

use crate::emit::{ensure_out_dir, print_summary, write_json, write_params};
use crate::inputs::InputArgs;
use crate::{CliError, CmdResult, GlobalArgs};

#[derive(Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub inputs: InputArgs,

    /// How many top holders to list.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Serialize)]
struct Params<'a> {
    command: &'static str,
    sources: &'a [String],
    top: usize,
}

#[derive(Serialize)]
struct Summary {
    sections: BTreeMap<&'static str, String>,
    strong_ties: u64,
    weak_ties: u64,
    indirect_ties: u64,
    active_months: usize,
    trading_days: usize,
    notes: Vec<String>,
}

fn write_csv(path: &Path, contents: String) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Data(anyhow::anyhow!("{path:?}: {e}")))
}

pub fn run(global: &GlobalArgs, args: &ReportArgs) -> CmdResult {
    let resolved = args.inputs.load()?;
    let dataset = &resolved.loaded.dataset;
    let out_dir = ensure_out_dir(&global.out)?;
    write_params(
        &out_dir,
        &Params {
            command: "report",
            sources: &resolved.sources,
            top: args.top,
        },
    )?;

    let mut sections: BTreeMap<&'static str, String> = BTreeMap::new();
    let has_profiles = dataset.accounts.iter().any(|a| a.profile.is_some());

    // Profile-derived sections: holder ranking and holding distribution.
    if has_profiles {
        let mut table = String::from("rank,address,holder_count\n");
        for (rank, (address, holders)) in top_holders(dataset, args.top).iter().enumerate() {
            table.push_str(&format!("{},{},{}\n", rank + 1, address, holders));
        }
        write_csv(&out_dir.join("top_holders.csv"), table)?;
        sections.insert("top_holders", "ok".into());

        let mut dist = String::from("bucket,count,fraction\n");
        for bucket in token_distribution(dataset) {
            dist.push_str(&format!(
                "{},{},{}\n",
                bucket.label, bucket.count, bucket.fraction
            ));
        }
        write_csv(&out_dir.join("holder_distribution.csv"), dist)?;
        sections.insert("holder_distribution", "ok".into());
    } else {
        let reason = "unavailable: no profile data".to_string();
        sections.insert("top_holders", reason.clone());
        sections.insert("holder_distribution", reason);
    }

    // Transaction-derived sections are always available.
    let months = activity_timeline(dataset);
    let mut timeline = String::from("year,month,active_accounts,transactions\n");
    for m in &months {
        timeline.push_str(&format!(
            "{},{},{},{}\n",
            m.year, m.month, m.active_accounts, m.transactions
        ));
    }
    write_csv(&out_dir.join("activity_timeline.csv"), timeline)?;
    sections.insert("activity_timeline", "ok".into());

    let mix = daily_buy_sell_mix(dataset);
    let mut mix_csv = String::from("day,buys,sells,buy_fraction,mean_value_eth\n");
    for d in &mix {
        mix_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            d.day,
            d.buys,
            d.sells,
            d.buy_fraction.map(|f| f.to_string()).unwrap_or_default(),
            d.mean_value_eth
        ));
    }
    write_csv(&out_dir.join("daily_mix.csv"), mix_csv)?;
    sections.insert("daily_mix", "ok".into());

    let holds = holding_relation(dataset);
    let ties = classify_ties(&holds, 2).map_err(|e| CliError::Data(e.into()))?;
    let counts = ties.counts();
    write_csv(
        &out_dir.join("tie_stats.csv"),
        format!(
            "kind,count\nstrong,{}\nweak,{}\nindirect,{}\n",
            counts.strong, counts.weak, counts.indirect
        ),
    )?;
    sections.insert("tie_stats", "ok".into());

    let summary = Summary {
        sections,
        strong_ties: counts.strong,
        weak_ties: counts.weak,
        indirect_ties: counts.indirect,
        active_months: months.len(),
        trading_days: mix.len(),
        notes: resolved.notes.clone(),
    };
    write_json(&out_dir.join("summary.json"), &summary)?;
    print_summary(global.format, &summary)?;
    Ok(0)
}
