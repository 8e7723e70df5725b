//! Reports: rows `(quantity, N, value)` plus named pass/fail checks, written
//! as JSON or CSV. Both forms carry the artifact version, config hash and seed.

use std::io::Write;
use std::path::Path;

use radnls_core::lp::BandNormTable;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance embedded in every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Stamp {
    pub fn new(config_hash: String, seed: u64) -> Self {
        Stamp { version: VERSION.to_string(), config_hash, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// One table entry. `n` holds the row key: a dyadic scale, a radius or a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub quantity: String,
    #[serde(rename = "N")]
    pub n: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable requirement, e.g. `< 1e-4`.
    pub requirement: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, requirement: format!("< {limit:e}"), passed: value < limit }
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            requirement: format!("{target} ± {tol:e}"),
            passed: (value - target).abs() <= tol,
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, requirement: impl Into<String>) -> Self {
        Check { name: name.into(), value: if passed { 1.0 } else { 0.0 }, requirement: requirement.into(), passed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(flatten)]
    pub stamp: Stamp,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
    /// Structured extras (certificates, fit reports, verifier output).
    pub detail: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, stamp: Stamp) -> Self {
        Report { command: command.into(), stamp, rows: Vec::new(), checks: Vec::new(), detail: serde_json::json!({}) }
    }

    pub fn row(&mut self, quantity: impl Into<String>, n: Option<f64>, value: f64) {
        self.rows.push(Row { quantity: quantity.into(), n, value });
    }

    pub fn table(&mut self, table: &BandNormTable) {
        for r in &table.rows {
            self.row(table.quantity.clone(), Some(r.key), r.value);
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.detail.as_object_mut().expect("detail is an object").insert(key.into(), v);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Comment lines with the stamp, then `quantity,N,value`; each check adds
    /// a row `check:<name>` with its measured value and `pass:<name>` with 1 or 0.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# radnls {} command={} config_hash={} seed={}\n",
            self.stamp.version, self.command, self.stamp.config_hash, self.stamp.seed
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["quantity", "N", "value"]).expect("in-memory write");
        let fmt = |x: f64| format!("{x:e}");
        for r in &self.rows {
            let n = r.n.map(fmt).unwrap_or_default();
            w.write_record([r.quantity.as_str(), &n, &fmt(r.value)]).expect("in-memory write");
        }
        for c in &self.checks {
            w.write_record([format!("check:{}", c.name), String::new(), fmt(c.value)]).expect("in-memory write");
            w.write_record([format!("pass:{}", c.name), String::new(), (c.passed as u8).to_string()])
                .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, path: &Path, format: Format) -> CliResult<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        f.write_all(self.render(format).as_bytes()).map_err(|e| CliError::io(path, e))
    }
}

/// Reads back the `(quantity, N, value)` rows of a CSV report.
pub fn parse_csv_rows(text: &str) -> CliResult<Vec<Row>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| CliError::format("csv report", e))?;
            let num = |s: &str| s.parse::<f64>().map_err(|e| CliError::format("csv report", e));
            let n = if rec[1].is_empty() { None } else { Some(num(&rec[1])?) };
            Ok(Row { quantity: rec[0].to_string(), n, value: num(&rec[2])? })
        })
        .collect()
}
