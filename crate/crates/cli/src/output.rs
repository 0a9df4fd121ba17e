use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

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

/// Shortest round-trip form, switching to scientific outside [1e−4, 1e15).
pub fn format_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(v) => format_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

/// One emitted data file.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl DataTable {
    pub fn new(name: impl Into<String>, columns: Vec<&'static str>) -> Self {
        DataTable {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Run identity stamped into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

pub fn render_csv(table: &DataTable, meta: &RunMeta) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "# tool: {} {}", meta.tool, meta.version).expect("in-memory write");
    writeln!(out, "# kind: {}", meta.kind).expect("in-memory write");
    writeln!(out, "# config_sha256: {}", meta.config_sha256).expect("in-memory write");
    writeln!(out, "# seed: {}", meta.seed).expect("in-memory write");
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::io(&table.name, std::io::Error::other(e));
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::text))
            .map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::io(&table.name, std::io::Error::other(e.to_string())))
}

pub fn render_json(table: &DataTable, meta: &RunMeta) -> Vec<u8> {
    let rows: Vec<Json> = table
        .rows
        .iter()
        .map(|r| Json::Array(r.iter().map(Cell::json).collect()))
        .collect();
    let doc = json!({ "meta": meta, "columns": table.columns, "rows": rows });
    let mut s = serde_json::to_vec_pretty(&doc).expect("JSON values always serialize");
    s.push(b'\n');
    s
}

/// Writes through a temporary file in the destination folder and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub wall_clock_s: f64,
    pub outputs: Vec<PathBuf>,
}
