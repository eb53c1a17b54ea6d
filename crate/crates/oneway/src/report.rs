//! Tabular reports rendered as human text, CSV or JSON.
//!
//! Floats are printed with Rust's shortest round-trip formatting, so equal
//! values always produce equal bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:?}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => i64::try_from(*v)
                .map(Value::from)
                .unwrap_or_else(|_| Value::String(v.to_string())),
            Cell::Float(v) => Value::from(*v),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::Int(v as i128)
            }
        }
    )*};
}
int_cell!(u32, u64, usize, i64);

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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Joins indices as `a;b;c` for a single CSV field.
pub fn index_list<T: ToString>(items: &[T]) -> Cell {
    Cell::Text(items.iter().map(T::to_string).collect::<Vec<_>>().join(";"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalars that do not fit the row shape; JSON and human output only.
    pub summary: Vec<(&'static str, Cell)>,
}

impl Report {
    pub fn new(command: impl Into<String>, columns: &[&'static str]) -> Self {
        Self {
            command: command.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the columns");
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &'static str, value: impl Into<Cell>) {
        self.summary.push((key, value.into()));
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        let summary: Map<String, Value> = self
            .summary
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_json()))
            .collect();
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "columns": self.columns,
            "rows": rows,
            "summary": summary,
        })
    }

    /// `key=value` lines for a single row, an aligned table otherwise, then
    /// the summary as `key=value` lines.
    pub fn human(&self) -> String {
        let mut out = String::new();
        if self.rows.len() == 1 {
            for (c, v) in self.columns.iter().zip(&self.rows[0]) {
                let _ = writeln!(out, "{c}={}", v.render());
            }
        } else if !self.rows.is_empty() {
            let rendered: Vec<Vec<String>> =
                self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
            let widths: Vec<usize> = self
                .columns
                .iter()
                .enumerate()
                .map(|(i, c)| rendered.iter().map(|r| r[i].len()).fold(c.len(), usize::max))
                .collect();
            let line = |cells: Vec<&str>| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            let _ = writeln!(out, "{}", line(self.columns.clone()));
            for r in &rendered {
                let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
            }
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "{k}={}", v.render());
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_csv()?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_file(path, json_bytes(&self.to_json()).as_slice())
    }
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("reports serialize");
    bytes.push(b'\n');
    bytes
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The JSON document written in place of a report when a command fails.
pub fn error_json(command: &str, e: &Error) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "error": {
            "code": e.exit_code(),
            "kind": e.kind(),
            "message": e.to_string(),
        },
    })
}

pub fn write_error_json(path: &Path, command: &str, e: &Error) -> Result<()> {
    write_file(path, &json_bytes(&error_json(command, e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("measure vc", &["vc", "witness"]);
        r.push(vec![1usize.into(), index_list(&[3, 5])]);
        r.note("exact", true);
        r
    }

    #[test]
    fn single_row_renders_as_pairs() {
        assert_eq!(sample().human(), "vc=1\nwitness=3;5\nexact=true\n");
    }

    #[test]
    fn csv_and_json_shapes() {
        let r = sample();
        assert_eq!(String::from_utf8(r.to_csv().unwrap()).unwrap(), "vc,witness\n1,3;5\n");
        let v = r.to_json();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["rows"][0][0], 1);
        assert_eq!(v["summary"]["exact"], true);
    }

    #[test]
    fn floats_use_round_trip_formatting() {
        assert_eq!(Cell::Float(0.0).render(), "0.0");
        assert_eq!(Cell::Float(0.1 + 0.2).render(), "0.30000000000000004");
        assert_eq!(Cell::from(None::<u64>).render(), "");
    }

    #[test]
    fn error_document_carries_code() {
        let e = Error::Core(oneway_core::Error::Infeasible("no".into()));
        let v = error_json("measure dopt", &e);
        assert_eq!(v["error"]["code"], 2);
        assert_eq!(v["error"]["kind"], "infeasible");
    }
}
