//! Tables, the result envelope and deterministic CSV/JSON writing.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL: &str = "specdegen";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(v.to_string()),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Column-named rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    Value::Object(
                        self.columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.clone(), v.json()))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

/// Which module call produced a payload.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub module: &'static str,
    pub operation: &'static str,
    pub inputs: Value,
}

/// Everything an emitted file carries besides its payload.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub config: Value,
    pub config_hash: String,
    pub provenance: Vec<Provenance>,
}

/// SHA-256 of the canonical (key-sorted, compact) JSON form.
pub fn config_hash(config: &Value) -> String {
    let text = serde_json::to_string(config).expect("JSON values serialize");
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl Envelope {
    pub fn new(config: impl Serialize, provenance: Vec<Provenance>) -> Self {
        let config = serde_json::to_value(config).expect("config serializes");
        let config_hash = config_hash(&config);
        Self {
            config,
            config_hash,
            provenance,
        }
    }

    /// `#` comment lines naming the tool, the config hash and the provenance.
    pub fn header(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {TOOL} {VERSION}");
        let _ = writeln!(out, "# config-sha256 {}", self.config_hash);
        for p in &self.provenance {
            let _ = writeln!(
                out,
                "# provenance {}::{} {}",
                p.module, p.operation, p.inputs
            );
        }
        out
    }

    pub fn csv(&self, table: &Table) -> String {
        let mut out = self.header();
        out.push_str(&table.columns.join(","));
        out.push('\n');
        for r in &table.rows {
            let cells: Vec<String> = r.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `payload` goes in as is; tables become arrays of row objects.
    pub fn json(&self, table: Option<&Table>, report: Option<Value>) -> String {
        let mut payload = serde_json::Map::new();
        if let Some(t) = table {
            payload.insert("columns".into(), json!(t.columns));
            payload.insert("rows".into(), t.json_rows());
        }
        if let Some(r) = report {
            payload.insert("report".into(), r);
        }
        let doc = json!({
            "tool": TOOL,
            "version": VERSION,
            "config": self.config,
            "config_sha256": self.config_hash,
            "provenance": self.provenance,
            "payload": Value::Object(payload),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        s.push('\n');
        s
    }

    pub fn render(&self, emit: Emit, table: &Table, report: Option<Value>) -> String {
        match emit {
            Emit::Csv => self.csv(table),
            Emit::Json => self.json(Some(table), report),
        }
    }
}

/// Writes to `path`, or to standard output when there is none.
pub fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            std::fs::write(p, text).map_err(|e| CliError::io(p, e))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2] {
            let s = fmt_num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let digits = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17);
        }
    }

    #[test]
    fn hash_ignores_key_order() {
        let a = json!({"t": 0.1, "n": 3});
        let b: Value = serde_json::from_str(r#"{"n": 3, "t": 0.1}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&json!({"t": 0.2, "n": 3})));
    }

    #[test]
    fn csv_layout() {
        let env = Envelope::new(json!({"n": 1}), vec![]);
        let mut t = Table::new(&["index", "zero"]);
        t.push(vec![1usize.into(), (-2.5f64).into()]);
        let s = env.csv(&t);
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# specdegen "));
        assert_eq!(lines[2], "index,zero");
        assert_eq!(lines[3], "1,-2.5000000000000000e0");
    }
}
