//! Output tables, manifests and error reporting.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

/// Bumped whenever a subcommand's columns change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Rows with a fixed column order.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn json_rows(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|row| {
                let obj = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.clone()))
                    .collect::<serde_json::Map<_, _>>();
                Value::Object(obj)
            })
            .collect()
    }

    fn write_csv(&self, out: impl Write) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell))?;
        }
        w.flush()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// What a subcommand produced.
pub struct Outcome {
    pub summary: Value,
    /// Structured report; when absent the JSON output carries only rows.
    pub report: Option<Value>,
    pub table: Table,
}

pub struct Run<'a> {
    pub subcommand: &'a str,
    pub config: Value,
    pub format: Format,
    pub out: Option<&'a Path>,
}

impl Run<'_> {
    fn manifest(&self, outcome: &Outcome) -> Value {
        json!({
            "tool": "freqlab",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "schema": format!("freqlab/{}/{}", self.subcommand, SCHEMA_VERSION),
            "columns": outcome.table.columns,
            "config": self.config,
            "summary": outcome.summary,
        })
    }

    /// Writes the result. The main output holds no timing so that reruns
    /// are byte-identical; wall-clock time goes to `<out>.run.json`.
    pub fn emit(&self, outcome: &Outcome, seconds: f64) -> io::Result<()> {
        let manifest = self.manifest(outcome);
        let mut body = Vec::new();
        match self.format {
            Format::Json => {
                let mut doc = serde_json::Map::new();
                doc.insert("manifest".into(), manifest.clone());
                if let Some(report) = &outcome.report {
                    doc.insert("report".into(), report.clone());
                }
                if outcome.report.is_none() || !outcome.table.rows.is_empty() {
                    doc.insert("rows".into(), Value::Array(outcome.table.json_rows()));
                }
                serde_json::to_writer_pretty(&mut body, &Value::Object(doc))?;
                body.push(b'\n');
            }
            Format::Csv => outcome.table.write_csv(&mut body)?,
        }
        match self.out {
            Some(path) => {
                fs::write(path, &body)?;
                let run = json!({ "manifest": manifest, "wall_clock_seconds": seconds });
                let mut text = serde_json::to_vec_pretty(&run)?;
                text.push(b'\n');
                fs::write(sidecar(path), text)
            }
            None => io::stdout().write_all(&body),
        }
    }
}

pub fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".run.json");
    PathBuf::from(name)
}

pub fn report_error(kind: &str, message: &str) {
    let err = json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{err}");
}
