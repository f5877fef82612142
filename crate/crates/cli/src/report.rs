//! Run reports: `report.jsonl`, CSV tables, artifacts and `timings.json`.
//!
//! Everything except `timings.json` is a pure function of the config.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};

pub const REPORT_FILE: &str = "report.jsonl";
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

/// What an experiment produces before it is stamped.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub result: Map<String, Value>,
    pub tables: Vec<Table>,
    /// Extra files, name and contents.
    pub artifacts: Vec<(String, Vec<u8>)>,
    pub timings: Vec<(String, f64)>,
}

impl Outcome {
    pub fn check(&mut self, name: &str, pass: bool, detail: Value) {
        self.checks.push(Check { name: name.into(), pass, detail });
    }

    pub fn put(&mut self, key: &str, value: impl Serialize) {
        self.result.insert(key.into(), serde_json::to_value(value).expect("result values serialize"));
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn artifact(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.artifacts.push((name.into(), contents.into()));
    }

    pub fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push((label.into(), start.elapsed().as_secs_f64()));
        out
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub experiment: String,
    pub version: String,
    pub config_hash: String,
    pub seed: String,
    pub outcome: Outcome,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.outcome.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.outcome.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.outcome.checks.iter().find(|c| c.name == name)
    }

    pub fn result(&self, key: &str) -> Option<&Value> {
        self.outcome.result.get(key)
    }

    /// The JSON lines: run header, one line per check, the result payload
    /// and the verdict.
    pub fn to_jsonl(&self) -> String {
        let mut lines = vec![json!({
            "kind": "run",
            "experiment": self.experiment,
            "version": self.version,
            "config_hash": self.config_hash,
            "seed": self.seed,
        })];
        for c in &self.outcome.checks {
            lines.push(json!({"kind": "check", "name": c.name, "pass": c.pass, "detail": c.detail}));
        }
        lines.push(json!({"kind": "result", "data": self.outcome.result}));
        lines.push(json!({"kind": "verdict", "pass": self.passed(), "failed": self.failed_checks()}));
        lines.iter().map(|l| format!("{l}\n")).collect()
    }

    /// Deterministic files by name: the report, tables and artifacts.
    pub fn files(&self) -> Result<Vec<(String, Vec<u8>)>> {
        let mut files = vec![(REPORT_FILE.to_string(), self.to_jsonl().into_bytes())];
        for t in &self.outcome.tables {
            files.push((t.file_name(), t.to_csv()?));
        }
        files.extend(self.outcome.artifacts.iter().cloned());
        Ok(files)
    }

    pub fn timings_json(&self) -> String {
        let map: Map<String, Value> = self.outcome.timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        serde_json::to_string_pretty(&map).expect("timings serialize") + "\n"
    }

    /// Writes every file to `dir`, each through a temporary file and a rename.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut files = self.files()?;
        files.push((TIMINGS_FILE.to_string(), self.timings_json().into_bytes()));
        for (name, bytes) in files {
            let path = dir.join(&name);
            write_atomic(&path, &bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".into(),
    });
    fs::write(&tmp, bytes).map_err(|source| CliError::File { path: tmp.clone(), source })?;
    fs::rename(&tmp, path).map_err(|source| CliError::File { path: path.into(), source })?;
    Ok(())
}
