//! Tables, their CSV/JSON encodings and the run manifest written next to every output file.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

/// One table cell. Floats keep their shortest round-trip representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => float_text(*v),
            Cell::Text(s) => csv_quote(s),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // i128 has no serde_json mapping; every integer we emit fits in i64 or u64.
            Cell::Int(v) => i64::try_from(*v)
                .map(Value::from)
                .or_else(|_| u64::try_from(*v).map(Value::from))
                .unwrap_or_else(|_| Value::String(v.to_string())),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => Value::String(float_text(*v)),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<i128> for Cell {
    fn from(v: i128) -> Self {
        Cell::Int(v)
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        i128::try_from(v).map(Cell::Int).unwrap_or_else(|_| Cell::Text(v.to_string()))
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

/// `inf`, `-inf` and `nan` spelled out; everything else in Rust's shortest form.
fn float_text(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A header row and data rows of equal width.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row; its width must match the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.header.is_empty() || self.rows.is_empty()
    }
}

/// Output encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("refusing to emit an empty table")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
}

/// Encodes a table. CSV: header row, `,` separators, `\n` line ends. JSON: array of objects.
pub fn encode(table: &Table, format: Format) -> Result<Vec<u8>, EmitError> {
    if table.is_empty() {
        return Err(EmitError::Empty);
    }
    let text = match format {
        Format::Csv => {
            let mut s = String::new();
            let header: Vec<String> = table.header.iter().map(|h| csv_quote(h)).collect();
            let _ = writeln!(s, "{}", header.join(","));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                let _ = writeln!(s, "{}", cells.join(","));
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        table.header.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    Value::Object(obj)
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("values serialize");
            s.push('\n');
            s
        }
    };
    Ok(text.into_bytes())
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

/// Writes the encoded table to `path` (stdout when `None`) and returns the checksum of the bytes.
pub fn emit(table: &Table, format: Format, path: Option<&Path>) -> Result<u64, EmitError> {
    let bytes = encode(table, format)?;
    match path {
        Some(p) => fs::write(p, &bytes).map_err(|source| EmitError::Io { path: p.display().to_string(), source })?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&bytes)
                .and_then(|_| out.flush())
                .map_err(|source| EmitError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(fnv1a64(&bytes))
}

/// Provenance of one output file. Re-running `command_line` reproduces `checksum`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub seed: u64,
    pub code_version: String,
    pub wall_time_secs: f64,
    pub checksum: u64,
    pub format: Format,
}

impl RunManifest {
    /// `<output>.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command_line": self.command_line,
            "seed": self.seed,
            "code_version": self.code_version,
            "wall_time_secs": self.wall_time_secs,
            "checksum": format!("{:016x}", self.checksum),
            "format": self.format.name(),
        })
    }

    pub fn write(&self, output: &Path) -> Result<PathBuf, EmitError> {
        let path = Self::path_for(output);
        let mut text = serde_json::to_string_pretty(&self.to_json()).expect("values serialize");
        text.push('\n');
        fs::write(&path, text).map_err(|source| EmitError::Io { path: path.display().to_string(), source })?;
        Ok(path)
    }
}
