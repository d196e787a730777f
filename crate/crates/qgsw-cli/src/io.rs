//! Atomic CSV/JSON output and the matching loaders.

use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("row {row} has {got} cells, schema has {want}")]
    Schema { row: usize, got: usize, want: usize },
    #[error("non-finite value in row {row}, column {column}")]
    NonFinite { row: usize, column: String },
    #[error("{path}: {source}")]
    Fs { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: cannot parse {text:?} in column {column}")]
    Parse { path: PathBuf, column: String, text: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // 17 significant digits: enough to round-trip every f64.
            Cell::Float(v) => format!("{v:.16e}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

/// Write `bytes` to a sibling temp file, then rename it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let fs_err = |source| IoError::Fs { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(fs_err)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(fs_err)?;
    f.write_all(bytes).map_err(fs_err)?;
    f.sync_all().map_err(fs_err)?;
    drop(f);
    fs::rename(&tmp, path).map_err(fs_err)
}

pub fn render_csv(header: &[&str], rows: &[Vec<Cell>]) -> Result<Vec<u8>, IoError> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(IoError::Schema { row: i, got: row.len(), want: header.len() });
        }
        if let Some(k) = row.iter().position(|c| matches!(c, Cell::Float(v) if !v.is_finite())) {
            return Err(IoError::NonFinite { row: i, column: header[k].to_string() });
        }
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|c| c.render()))?;
    }
    w.into_inner().map_err(|e| IoError::Fs { path: PathBuf::new(), source: e.into_error() })
}

/// Header row, then one record per row. Nothing is written if validation fails.
pub fn emit_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), IoError> {
    let bytes = render_csv(header, rows)?;
    write_atomic(path, &bytes)
}

pub fn emit_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parse a column as `f64`.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>, IoError> {
        let k = self.column(name).ok_or_else(|| IoError::Parse {
            path: PathBuf::new(),
            column: name.to_string(),
            text: "<missing column>".into(),
        })?;
        self.rows
            .iter()
            .map(|r| {
                r[k].parse::<f64>().map_err(|_| IoError::Parse {
                    path: PathBuf::new(),
                    column: name.to_string(),
                    text: r[k].clone(),
                })
            })
            .collect()
    }
}

pub fn load_csv(path: &Path) -> Result<Table, IoError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok(Table { header, rows })
}
