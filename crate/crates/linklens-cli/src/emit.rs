//! Output plumbing: parameter echoes, JSON artifacts, and stdout summaries
//! rendered as a table, JSON, or flattened CSV.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::{CliError, Format};

/// Create the output directory (if needed) and return its path.
pub fn ensure_out_dir(dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::Data(anyhow::anyhow!("cannot create output directory {dir:?}: {e}"))
    })?;
    Ok(dir.to_path_buf())
}

/// Write pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(anyhow::anyhow!("serializing {path:?}: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Data(anyhow::anyhow!("writing {path:?}: {e}")))?;
    Ok(())
}

/// Write the per-run parameter echo (`params.json`).
pub fn write_params<T: Serialize>(out_dir: &Path, params: &T) -> Result<(), CliError> {
    write_json(&out_dir.join("params.json"), params)
}

/// Render a summary object to stdout in the requested format.
pub fn print_summary<T: Serialize>(format: Format, summary: &T) -> Result<(), CliError> {
    let value = serde_json::to_value(summary)
        .map_err(|e| CliError::Data(anyhow::anyhow!("rendering summary: {e}")))?;
    match format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&value).unwrap_or_default());
        }
        Format::Csv => {
            println!("key,value");
            for (key, leaf) in flatten(&value) {
                println!("{},{}", key, csv_field(&leaf));
            }
        }
        Format::Table => {
            let rows = flatten(&value);
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (key, leaf) in rows {
                println!("{key:<width$}  {}", plain(&leaf));
            }
        }
    }
    Ok(())
}

/// Depth-first flattening of nested objects/arrays into dotted keys.
fn flatten(value: &Value) -> Vec<(String, Value)> {
    let mut rows = Vec::new();
    walk(value, String::new(), &mut rows);
    rows
}

fn walk(value: &Value, prefix: String, rows: &mut Vec<(String, Value)>) {
    match value {
        Value::Object(map) => {
            for (key, child) in map {
                let next = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                walk(child, next, rows);
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                rows.push((prefix, Value::String("[]".into())));
            } else {
                for (idx, child) in items.iter().enumerate() {
                    walk(child, format!("{prefix}[{idx}]"), rows);
                }
            }
        }
        leaf => rows.push((prefix, leaf.clone())),
    }
}

fn plain(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_field(value: &Value) -> String {
    let text = plain(value);
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text
    }
}
