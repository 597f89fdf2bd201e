//! Black-box tests of the `linklens` binary: exit codes, artifact layout,
//! determinism, and error reporting.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linklens"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn write_spec(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const PLANTED_SPEC: &str = r#"{
  "seed": 99,
  "n_background_accounts": 40,
  "n_days": 10,
  "daily_tx_rate": 0.6,
  "price_range_wei": [1000000000000000, 20000000000000000],
  "plants": [
    { "id": "h1", "type": "hunter_cluster", "size": 3 },
    { "id": "w1", "type": "wash_cohort", "count": 5, "day_range": [2, 5] },
    { "id": "ring", "type": "s2_linkage" }
  ]
}"#;

const BACKGROUND_SPEC: &str = r#"{
  "seed": 7,
  "n_background_accounts": 25,
  "n_days": 6,
  "daily_tx_rate": 0.5,
  "price_range_wei": [1000000000000000, 20000000000000000]
}"#;

fn make_bundle(dir: &Path, spec_body: &str) -> PathBuf {
    let spec = write_spec(dir, "spec.json", spec_body);
    let bundle = dir.join("bundle");
    let out = run(&[
        "synth",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        bundle.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "synth failed: {}", stderr_of(&out));
    bundle
}

#[test]
fn synth_bundle_ingests_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = make_bundle(dir.path(), PLANTED_SPEC);
    for name in [
        "users.csv",
        "txs_l1.csv",
        "txs_l2.csv",
        "follows.csv",
        "ground_truth.json",
        "params.json",
    ] {
        assert!(bundle.join(name).is_file(), "missing {name}");
    }
    let out_dir = dir.path().join("ingest");
    let out = run(&[
        "ingest",
        "--bundle",
        bundle.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_of(&out));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["row_errors"], 0);
    assert!(out_dir.join("params.json").is_file());
}

#[test]
fn corrupt_rows_write_an_error_file_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = make_bundle(dir.path(), BACKGROUND_SPEC);
    let txs = bundle.join("txs_l2.csv");
    let mut body = fs::read_to_string(&txs).unwrap();
    body.push_str("not-a-hash,1,2,3,4,5,6,7,8,9,10\n");
    fs::write(&txs, body).unwrap();

    let out_dir = dir.path().join("ingest");
    let out = run(&[
        "ingest",
        "--bundle",
        bundle.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let errors = fs::read_to_string(out_dir.join("row_errors.csv")).unwrap();
    assert!(errors.lines().count() >= 2, "expected a recorded reject: {errors}");
}

#[test]
fn missing_follows_file_notes_the_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = make_bundle(dir.path(), BACKGROUND_SPEC);
    fs::remove_file(bundle.join("follows.csv")).unwrap();
    let out_dir = dir.path().join("ingest");
    let out = run(&[
        "ingest",
        "--bundle",
        bundle.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_of(&out));
    let summary = fs::read_to_string(out_dir.join("summary.json")).unwrap();
    assert!(
        summary.contains("reconstructed from share trades"),
        "summary should note the holding fallback: {summary}"
    );
}

#[test]
fn detect_reports_planted_findings_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = make_bundle(dir.path(), PLANTED_SPEC);
    let out_dir = dir.path().join("detect");
    let out = run(&[
        "detect",
        "--bundle",
        bundle.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr_of(&out));

    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(bundle.join("ground_truth.json")).unwrap())
            .unwrap();
    let expected_hunters: usize = truth["plants"]
        .as_object()
        .unwrap()
        .values()
        .map(|p| p["hunters"].as_array().map_or(0, |h| h.len()))
        .sum();
    let expected_wash: usize = truth["plants"]
        .as_object()
        .unwrap()
        .values()
        .map(|p| p["wash"].as_array().map_or(0, |w| w.len()))
        .sum();

    let hunters = fs::read_to_string(out_dir.join("hunters.jsonl")).unwrap();
    assert_eq!(hunters.lines().count(), expected_hunters);
    for line in hunters.lines() {
        let parsed: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(parsed["main"].is_string());
    }
    let wash = fs::read_to_string(out_dir.join("wash.jsonl")).unwrap();
    assert_eq!(wash.lines().count(), expected_wash);
    assert!(out_dir.join("wash_days.csv").is_file());
    assert!(out_dir.join("wash_windows.csv").is_file());
}

#[test]
fn background_only_detect_is_clean_and_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = make_bundle(dir.path(), BACKGROUND_SPEC);
    let out_dir = dir.path().join("detect");
    let out = run(&[
        "detect",
        "--bundle",
        bundle.to_str().unwrap(),
        "--scenarios",
        "s1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_of(&out));
    assert_eq!(fs::read_to_string(out_dir.join("hunters.jsonl")).unwrap(), "");
    assert_eq!(fs::read_to_string(out_dir.join("wash.jsonl")).unwrap(), "");
    assert_eq!(fs::read_to_string(out_dir.join("links.jsonl")).unwrap(), "");
}

#[test]
fn links_without_base_layer_data_is_a_capability_error() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = make_bundle(dir.path(), BACKGROUND_SPEC);
    fs::remove_file(bundle.join("txs_l1.csv")).unwrap();
    let out_dir = dir.path().join("detect");
    let out = run(&[
        "detect",
        "--bundle",
        bundle.to_str().unwrap(),
        "--which",
        "links",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr_of(&out).contains("txs_l1.csv"),
        "error should name the missing file: {}",
        stderr_of(&out)
    );
}

#[test]
fn entropy_totals_are_bucket_invariant_under_pre_convention() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = make_bundle(dir.path(), PLANTED_SPEC);
    let mut totals = Vec::new();
    for (label, bucket) in [("day", "86400"), ("twoday", "172800")] {
        let out_dir = dir.path().join(label);
        let out = run(&[
            "entropy",
            "--bundle",
            bundle.to_str().unwrap(),
            "--bucket",
            bucket,
            "--nodes",
            "pre",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr_of(&out));
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap())
                .unwrap();
        totals.push(summary["total_loss"].as_f64().unwrap());
        assert!(out_dir.join("entropy_series.csv").is_file());
        assert!(out_dir.join("entropy.svg").is_file());
    }
    assert!(
        (totals[0] - totals[1]).abs() < 1e-9,
        "bucket width changed the telescoped total: {totals:?}"
    );
}

#[test]
fn entropy_series_csv_cumulative_column_is_prefix_sum() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = make_bundle(dir.path(), PLANTED_SPEC);
    let out_dir = dir.path().join("entropy");
    let out = run(&[
        "entropy",
        "--bundle",
        bundle.to_str().unwrap(),
        "--bucket",
        "86400",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_of(&out));
    let csv = fs::read_to_string(out_dir.join("entropy_series.csv")).unwrap();
    let mut running = 0.0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let loss: f64 = cols[4].parse().unwrap();
        let cumulative: f64 = cols[5].parse().unwrap();
        running += loss;
        assert!((running - cumulative).abs() < 1e-9, "line {line}");
    }
}

#[test]
fn empty_transaction_history_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let txs = dir.path().join("txs_l2.csv");
    fs::write(
        &txs,
        "Txhash,Blockno,UnixTimestamp,From,To,Value_IN(ETH),Value_OUT(ETH),TxnFee(ETH),Method,Status,ErrCode\n",
    )
    .unwrap();
    let out = run(&[
        "entropy",
        "--txs-l2",
        txs.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr_of(&out).contains("degenerate"), "{}", stderr_of(&out));
}

#[test]
fn report_reruns_are_byte_identical_and_mark_missing_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = make_bundle(dir.path(), PLANTED_SPEC);

    let mut contents = Vec::new();
    for label in ["r1", "r2"] {
        let out_dir = dir.path().join(label);
        let out = run(&[
            "report",
            "--bundle",
            bundle.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr_of(&out));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        contents.push(files);
    }
    assert_eq!(contents[0], contents[1], "report artifacts changed across re-runs");

    // Without the profile table, profile-derived sections are marked.
    fs::remove_file(bundle.join("users.csv")).unwrap();
    let out_dir = dir.path().join("noprofiles");
    let out = run(&[
        "report",
        "--bundle",
        bundle.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_of(&out));
    let summary = fs::read_to_string(out_dir.join("summary.json")).unwrap();
    assert!(summary.contains("unavailable: no profile data"), "{summary}");
    assert!(!out_dir.join("top_holders.csv").exists());
}

#[test]
fn kol_plants_surface_in_the_top_holder_table() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{
      "seed": 5,
      "n_background_accounts": 30,
      "n_days": 5,
      "daily_tx_rate": 0.4,
      "price_range_wei": [1000000000000000, 20000000000000000],
      "plants": [
        { "id": "elite", "type": "kol_elite", "count": 3, "holder_target": 7777 }
      ]
    }"#;
    let bundle = make_bundle(dir.path(), spec);
    let out_dir = dir.path().join("report");
    let out = run(&[
        "report",
        "--bundle",
        bundle.to_str().unwrap(),
        "--top",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_of(&out));

    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(bundle.join("ground_truth.json")).unwrap())
            .unwrap();
    let planted: Vec<String> = truth["plants"]["elite"]["accounts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let table = fs::read_to_string(out_dir.join("top_holders.csv")).unwrap();
    for address in planted {
        assert!(table.contains(&address), "top holders missing {address}: {table}");
    }
}

#[test]
fn oversubscribed_plants_fail_with_the_plant_id() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "bad.json",
        r#"{
          "seed": 1,
          "n_background_accounts": 3,
          "n_days": 5,
          "daily_tx_rate": 0.4,
          "price_range_wei": [1000000000000000, 20000000000000000],
          "plants": [ { "id": "greedy", "type": "hunter_cluster", "size": 6 } ]
        }"#,
    );
    let out = run(&[
        "synth",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr_of(&out).contains("greedy"), "{}", stderr_of(&out));
}

#[test]
fn usage_errors_exit_1() {
    // No inputs at all.
    let out = run(&["detect"]);
    assert_eq!(code(&out), 1, "{}", stderr_of(&out));
    // Unknown flag.
    let out = run(&["ingest", "--nonsense"]);
    assert_eq!(code(&out), 1);
    // Out-of-range bucket.
    let out = run(&["entropy", "--bucket", "0", "--txs-l2", "x.csv"]);
    assert_eq!(code(&out), 1);
    // Help and version are success.
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn bundled_example_spec_round_trips() {
    let spec = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios/example.json");
    assert!(spec.is_file(), "repository example spec is missing");
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle");
    let out = run(&[
        "synth",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        bundle.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_of(&out));
    let ingest_dir = dir.path().join("ingest");
    let out = run(&[
        "ingest",
        "--bundle",
        bundle.to_str().unwrap(),
        "--out",
        ingest_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_of(&out));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ingest_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["row_errors"], 0);
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "spec.json", BACKGROUND_SPEC);
    let out_dir = dir.path().join("from-env");
    let output = bin()
        .args(["synth", "--spec", spec.to_str().unwrap()])
        .env("LINKLENS_OUT", &out_dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(out_dir.join("txs_l2.csv").is_file());
}
