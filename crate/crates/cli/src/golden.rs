//! Byte comparison of report files against committed goldens.

use std::fs;
use std::path::Path;

use serde_json::Value;
use similar::TextDiff;

use crate::error::{CliError, Result};
use crate::report::{REPORT_FILE, TIMINGS_FILE};

/// Compares the deterministic files of `report_dir` with `golden_dir`.
///
/// Every golden file must match byte for byte and every report file must
/// have a golden. A golden directory without `report.jsonl` is an error.
pub fn verify_golden(report_dir: &Path, golden_dir: &Path) -> Result<()> {
    let mut files = Vec::new();
    for entry in fs::read_dir(report_dir).map_err(|source| CliError::File { path: report_dir.into(), source })? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name == TIMINGS_FILE || name.ends_with(".tmp") || !entry.file_type()?.is_file() {
            continue;
        }
        files.push((name, fs::read(entry.path())?));
    }
    files.sort();
    compare_files(&files, golden_dir)
}

/// Same as [`verify_golden`] for files held in memory.
pub fn compare_files(files: &[(String, Vec<u8>)], golden_dir: &Path) -> Result<()> {
    let report_golden = golden_dir.join(REPORT_FILE);
    if !report_golden.is_file() {
        return Err(CliError::GoldenMissing(report_golden));
    }
    for entry in fs::read_dir(golden_dir).map_err(|source| CliError::File { path: golden_dir.into(), source })? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if !files.iter().any(|(n, _)| *n == name) {
            return Err(CliError::GoldenMismatch { file: name, diff: "file absent from the report".into() });
        }
    }
    for (name, bytes) in files {
        let path = golden_dir.join(name);
        if !path.is_file() {
            return Err(CliError::GoldenMissing(path));
        }
        let golden = fs::read(&path)?;
        if golden != *bytes {
            let (g, r) = (String::from_utf8_lossy(&golden), String::from_utf8_lossy(bytes));
            let mut diff = String::new();
            if name.ends_with(".jsonl") {
                for line in jsonl_field_diff(&g, &r) {
                    diff.push_str(&line);
                    diff.push('\n');
                }
            }
            diff.push_str(
                &TextDiff::from_lines(g.as_ref(), r.as_ref())
                    .unified_diff()
                    .context_radius(2)
                    .header(&format!("golden/{name}"), &format!("report/{name}"))
                    .to_string(),
            );
            return Err(CliError::GoldenMismatch { file: name.clone(), diff });
        }
    }
    Ok(())
}

fn line_label(v: &Value, index: usize) -> String {
    match (v.get("kind").and_then(Value::as_str), v.get("name").and_then(Value::as_str)) {
        (Some(kind), Some(name)) => format!("{kind}[{name}]"),
        (Some(kind), None) => kind.to_string(),
        _ => format!("line{}", index + 1),
    }
}

/// `path: golden -> report` for every leaf field that differs.
pub fn jsonl_field_diff(golden: &str, report: &str) -> Vec<String> {
    let parse = |s: &str| -> Vec<Value> { s.lines().map(|l| serde_json::from_str(l).unwrap_or(Value::String(l.into()))).collect() };
    let (g, r) = (parse(golden), parse(report));
    let mut out = Vec::new();
    for i in 0..g.len().max(r.len()) {
        match (g.get(i), r.get(i)) {
            (Some(a), Some(b)) => value_diff(a, b, &line_label(a, i), &mut out),
            (Some(a), None) => out.push(format!("{}: line removed", line_label(a, i))),
            (None, Some(b)) => out.push(format!("{}: line added", line_label(b, i))),
            (None, None) => {}
        }
    }
    out
}

fn value_diff(a: &Value, b: &Value, path: &str, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                let sub = format!("{path}.{k}");
                match (x.get(k), y.get(k)) {
                    (Some(p), Some(q)) => value_diff(p, q, &sub, out),
                    (Some(p), None) => out.push(format!("{sub}: {p} -> (absent)")),
                    (None, Some(q)) => out.push(format!("{sub}: (absent) -> {q}")),
                    (None, None) => {}
                }
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                value_diff(p, q, &format!("{path}[{i}]"), out);
            }
        }
        _ if a != b => out.push(format!("{path}: {a} -> {b}")),
        _ => {}
    }
}
