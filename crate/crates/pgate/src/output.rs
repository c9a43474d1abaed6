//! Artifact emission. Every dataset is written either as CSV (with a config
//! hash comment line and a header) plus a JSON summary, or as one JSON file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Column-oriented dataset. Cells are JSON numbers or strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything one subcommand produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub name: &'static str,
    pub table: Table,
    pub summary: Value,
    /// Extra plain-text rendering (e.g. the budget table).
    pub text: Option<String>,
}

/// JSON number, or null for non-finite values.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "nan".to_string(),
        other => other.to_string(),
    }
}

pub fn csv_bytes(table: &Table, config_hash: &str) -> Result<Vec<u8>, CliError> {
    let mut buf = format!("# config_sha256: {config_hash}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&table.columns).map_err(|e| CliError::io(e.to_string()))?;
        for row in &table.rows {
            w.write_record(row.iter().map(cell)).map_err(|e| CliError::io(e.to_string()))?;
        }
        w.flush()?;
    }
    Ok(buf)
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("json serializes");
    s.push(b'\n');
    s
}

/// Write `artifacts` under `dir`; returns the paths written, in order.
pub fn write(dir: &Path, artifacts: &Artifacts, format: Format, config_hash: &str) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    let name = artifacts.name;
    match format {
        Format::Csv => {
            files.push((dir.join(format!("{name}.csv")), csv_bytes(&artifacts.table, config_hash)?));
            let summary = json!({ "config_sha256": config_hash, "command": name, "summary": artifacts.summary });
            files.push((dir.join(format!("{name}_summary.json")), pretty(&summary)));
        }
        Format::Json => {
            let doc = json!({
                "config_sha256": config_hash,
                "command": name,
                "summary": artifacts.summary,
                "columns": artifacts.table.columns,
                "rows": artifacts.table.rows,
            });
            files.push((dir.join(format!("{name}.json")), pretty(&doc)));
        }
    }
    if let Some(text) = &artifacts.text {
        files.push((dir.join(format!("{name}.txt")), text.clone().into_bytes()));
    }
    for (path, bytes) in &files {
        fs::write(path, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
