//! CSV / JSONL record writing with atomic file replacement.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::args::Format;
use crate::CliError;

/// One scalar cell of an output record.
#[derive(Debug, Clone, Copy)]
pub enum Field {
    Int(u64),
    Float(f64),
}

impl Field {
    fn csv(&self) -> String {
        match *self {
            Field::Int(v) => v.to_string(),
            // Shortest representation that round-trips.
            Field::Float(v) => format!("{v:?}"),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Field::Int(v) => Value::from(v),
            Field::Float(v) => serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number),
        }
    }
}

/// Column names plus rows, rendered as CSV (header line first) or JSONL.
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Field::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            Format::Jsonl => {
                for row in &self.rows {
                    let record: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(name, field)| (name.to_string(), field.json()))
                        .collect();
                    let _ = writeln!(out, "{}", Value::Object(record));
                }
            }
        }
        out
    }
}

/// Writes every `(name, contents)` pair into `dir`, each through a temporary
/// file renamed into place.
pub fn write_all(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(contents.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_csv_and_jsonl() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Field::Int(3), Field::Float(0.1)]);
        t.push(vec![Field::Int(4), Field::Float(1.0)]);
        assert_eq!(t.render(Format::Csv), "a,b\n3,0.1\n4,1.0\n");
        assert_eq!(t.render(Format::Jsonl), "{\"a\":3,\"b\":0.1}\n{\"a\":4,\"b\":1.0}\n");
    }

    #[test]
    fn floats_round_trip() {
        for x in [1.0 / 3.0, 3825.0 / 4031.0, 1e-300, 123456789.12345679] {
            let s = Field::Float(x).csv();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
