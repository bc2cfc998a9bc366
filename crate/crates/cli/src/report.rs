//! Self-describing run reports.
//!
//! JSON reports carry `schema`, the command name, a timestamp (the one field
//! excluded from reproducibility), the fully resolved config, the seed list,
//! and the command results. CSV reports carry the same header material as
//! `#`-prefixed comment lines followed by one documented table.

use crate::error::CliError;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report<'a> {
    pub schema: u32,
    pub command: &'a str,
    pub timestamp: String,
    pub config: BTreeMap<&'a str, &'a str>,
    pub seeds: &'a [u64],
    pub results: &'a serde_json::Value,
}

/// Everything a command hands back: the JSON results, the seed list it
/// actually used, scalar lines and one table for CSV output, and whether a
/// requested certificate was refused (exit code 2).
pub struct Outcome {
    pub results: serde_json::Value,
    pub seeds: Vec<u64>,
    pub scalars: Vec<(String, String)>,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
    pub certificate_failed: bool,
}

impl Outcome {
    pub fn new(results: serde_json::Value, columns: &'static [&'static str]) -> Self {
        Outcome {
            results,
            seeds: Vec::new(),
            scalars: Vec::new(),
            columns,
            rows: Vec::new(),
            certificate_failed: false,
        }
    }

    pub fn scalar(&mut self, name: &str, value: impl std::fmt::Display) {
        self.scalars.push((name.to_string(), value.to_string()));
    }
}

pub fn timestamp_now() -> String {
    humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string()
}

pub fn render_json(report: &Report) -> String {
    let mut body = serde_json::to_string_pretty(report).expect("report serializes");
    body.push('\n');
    body
}

pub fn render_csv(report: &Report, outcome: &Outcome) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema={}\n", report.schema));
    out.push_str(&format!("# command={}\n", report.command));
    out.push_str(&format!("# timestamp={}\n", report.timestamp));
    let seeds: Vec<String> = report.seeds.iter().map(u64::to_string).collect();
    out.push_str(&format!("# seeds={}\n", seeds.join(",")));
    for (k, v) in &report.config {
        out.push_str(&format!("# config.{k}={v}\n"));
    }
    for (k, v) in &outcome.scalars {
        out.push_str(&format!("# result.{k}={v}\n"));
    }
    out.push_str(&outcome.columns.join(","));
    out.push('\n');
    for row in &outcome.rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_out(path: &str, body: &str) -> Result<(), CliError> {
    if path == "-" {
        std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(CliError::run)
    } else {
        std::fs::write(path, body).map_err(|e| CliError::Run(format!("{path}: {e}")))
    }
}
