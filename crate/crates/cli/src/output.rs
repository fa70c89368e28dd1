//! Tables and reports, written as CSV (one header line, 17 significant
//! digits) or JSON.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::OutputFormat;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
}

impl Cell {
    fn to_text(self) -> String {
        match self {
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
        }
    }

    fn to_json(self) -> Value {
        match self {
            // non-finite floats have no JSON form
            Cell::Float(v) => serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(v),
            Cell::Bool(v) => Value::Bool(v),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Cell::Float(v) => v,
            Cell::Int(v) => v as f64,
            Cell::Bool(v) => f64::from(u8::from(v)),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_f64()).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_text()))?;
        }
        w.flush()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), v.to_json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// What a run produces.
#[derive(Debug, Clone)]
pub enum Artifact {
    Table(Table),
    Report(Value),
    /// A summary plus a sampled profile.
    Profile { summary: Value, profile: Table },
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Serialize(e.to_string()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<W: Write>(mut w: W, v: &Value, path: &Path) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| CliError::Serialize(e.to_string()))?;
    writeln!(w).map_err(io)?;
    w.flush().map_err(io)
}

fn write_table<W: Write>(w: W, t: &Table, format: OutputFormat, path: &Path) -> Result<(), CliError> {
    match format {
        OutputFormat::Csv => t.write_csv(w).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        OutputFormat::Json => write_json(w, &t.to_json(), path),
    }
}

/// Sibling path for the summary of a profile artifact: `out.csv` -> `out.json`.
pub fn summary_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes to `path`, or to stdout when `None`.
pub fn emit(artifact: &Artifact, path: Option<&Path>, format: OutputFormat) -> Result<(), CliError> {
    let stdout = Path::new("<stdout>");
    match (artifact, path) {
        (Artifact::Table(t), Some(p)) => write_table(create(p)?, t, format, p),
        (Artifact::Table(t), None) => write_table(io::stdout().lock(), t, format, stdout),
        (Artifact::Report(v), Some(p)) => write_json(create(p)?, v, p),
        (Artifact::Report(v), None) => write_json(io::stdout().lock(), v, stdout),
        (Artifact::Profile { summary, profile }, path) => {
            let combined = || {
                let mut obj = summary.clone();
                if let Value::Object(m) = &mut obj {
                    m.insert("profile".into(), profile.to_json());
                }
                obj
            };
            match (format, path) {
                (OutputFormat::Json, Some(p)) => write_json(create(p)?, &combined(), p),
                (OutputFormat::Json, None) => write_json(io::stdout().lock(), &combined(), stdout),
                (OutputFormat::Csv, Some(p)) => {
                    let sp = summary_path(p);
                    if sp == p {
                        return Err(CliError::config(format!(
                            "output path {} would be overwritten by the summary; use a .csv name",
                            p.display()
                        )));
                    }
                    write_table(create(p)?, profile, format, p)?;
                    write_json(create(&sp)?, summary, &sp)
                }
                (OutputFormat::Csv, None) => {
                    write_table(io::stdout().lock(), profile, format, stdout)?;
                    write_json(io::stderr().lock(), summary, Path::new("<stderr>"))
                }
            }
        }
    }
}
