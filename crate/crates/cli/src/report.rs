//! Report records and their CSV/JSON emission.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

/// A float at 12 significant digits, printed in its shortest round-trip form.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float");
    if (1e-4..1e15).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Points inside a single cell: coordinates joined by `;`.
pub fn format_point(p: &[f64]) -> String {
    p.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(";")
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

pub trait Record: Serialize + DeserializeOwned {
    fn columns() -> &'static [&'static str];
    fn cells(&self) -> Vec<Cell>;
    /// A lone record is written as a JSON object rather than a one-element array.
    const SINGLE: bool = false;
}

pub fn to_csv<R: Record>(records: &[R]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(R::columns()).map_err(|e| CliError::Usage(e.to_string()))?;
    for r in records {
        w.write_record(r.cells().iter().map(Cell::render)).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn to_json<R: Record>(records: &[R]) -> Result<String, CliError> {
    let text = if R::SINGLE && records.len() == 1 {
        serde_json::to_string_pretty(&records[0])
    } else {
        serde_json::to_string_pretty(records)
    };
    text.map_err(|e| CliError::Usage(e.to_string()))
}

pub fn from_json<R: Record>(text: &str) -> Result<Vec<R>, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Usage(e.to_string()))?;
    let parsed = if value.is_object() {
        serde_json::from_value(value).map(|r| vec![r])
    } else {
        serde_json::from_value(value)
    };
    parsed.map_err(|e| CliError::Usage(e.to_string()))
}

pub fn render<R: Record>(records: &[R], format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => to_csv(records),
        Format::Json => to_json(records),
    }
}

/// Writes the report to `path`.
pub fn emit_report<R: Record>(records: &[R], format: Format, path: &Path) -> Result<(), CliError> {
    let text = render(records, format)?;
    let mut file = std::fs::File::create(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    file.write_all(text.as_bytes()).map_err(|e| CliError::Io(path.to_path_buf(), e))
}
