//! Data file emission for experiment runs.
//!
//! Every run produces one or more tables plus a `run.json` manifest that
//! echoes the fully resolved configuration. Nothing here depends on the
//! clock or on iteration order of hashed containers, so a rerun with the
//! same configuration writes byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::error::{Error, Result};

/// One table cell. Integers and text keep their natural formatting;
/// floating-point values go out with 15 significant digits.
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

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) => s.serialize_f64(*v),
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Text(v) => s.serialize_str(v),
        }
    }
}

/// 15 significant digits in scientific notation; the zero sign is
/// normalized so that -0.0 and 0.0 print identically.
pub fn format_float(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.14e}")
}

/// A named rectangular table.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match header"
        );
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                match cell {
                    Cell::Num(v) => out.push_str(&format_float(*v)),
                    Cell::Int(v) => {
                        let _ = write!(out, "{v}");
                    }
                    Cell::Text(v) => out.push_str(v),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        // serde_json writes structs in field order and floats by shortest
        // round-trip, both deterministic
        let mut text = serde_json::to_string_pretty(self).expect("table serialization");
        text.push('\n');
        text
    }
}

/// Manifest describing one run: what was executed, with which fully
/// resolved configuration, and which files came out. Deliberately free of
/// timestamps so reruns are comparable.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub experiment: &'a str,
    pub artifact_version: &'a str,
    pub format: OutputFormat,
    /// Recorded only when shot sampling was actually used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub files: Vec<String>,
    pub config: &'a RunConfig,
}

/// Writes all tables of a run plus `run.json`, returning the paths written.
pub fn write_run(
    out_dir: &Path,
    manifest_base: Manifest<'_>,
    tables: &[(String, Table)],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, &e))?;
    let extension = match manifest_base.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let mut manifest = manifest_base;
    let mut written = Vec::new();
    for (name, table) in tables {
        let file_name = format!("{name}.{extension}");
        let path = out_dir.join(&file_name);
        let body = match manifest.format {
            OutputFormat::Csv => table.to_csv(),
            OutputFormat::Json => table.to_json(),
        };
        std::fs::write(&path, body).map_err(|e| io_error(&path, &e))?;
        manifest.files.push(file_name);
        written.push(path);
    }
    let manifest_path = out_dir.join("run.json");
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    body.push('\n');
    std::fs::write(&manifest_path, body).map_err(|e| io_error(&manifest_path, &e))?;
    written.push(manifest_path);
    Ok(written)
}

fn io_error(path: &Path, e: &std::io::Error) -> Error {
    Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))
}
