use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, Terminator, WriterBuilder};
use serde_json::{Map, Value};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// Reals use 17 significant digits, which round-trip exactly.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format!("{x:.16e}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn parse(s: &str) -> Cell {
        if let Ok(i) = s.parse::<i64>() {
            return Cell::Int(i);
        }
        if let Ok(x) = s.parse::<f64>() {
            return Cell::Real(x);
        }
        match s {
            "true" => Cell::Bool(true),
            "false" => Cell::Bool(false),
            _ => Cell::Text(s.to_string()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Real(x) => Some(x),
            Cell::Int(i) => Some(i as f64),
            _ => None,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Real(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// A header plus rows, emitted as CSV or as a JSON array of objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    pub fn real_column(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?.into_iter().map(Cell::as_f64).collect()
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = WriterBuilder::new()
            .terminator(Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self, csv::Error> {
        let mut r = ReaderBuilder::new().from_reader(bytes);
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(Cell::parse).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::to_json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn render(&self, format: TableFormat) -> Vec<u8> {
        match format {
            TableFormat::Csv => self.to_csv(),
            TableFormat::Json => {
                let mut v = serde_json::to_vec_pretty(&self.to_json()).expect("serializable");
                v.push(b'\n');
                v
            }
        }
    }

    /// Writes `dir/stem.{csv,json}` atomically and returns the path.
    pub fn write(&self, dir: &Path, stem: &str, format: TableFormat) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        write_atomic(&path, &self.render(format))?;
        Ok(path)
    }
}

/// Writes to a temporary file in the target directory, then renames it over
/// `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
