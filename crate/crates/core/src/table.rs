//! Tabular output in CSV or JSON.
//!
//! CSV floats are written with 17 significant digits so every value
//! round-trips exactly; metadata goes into leading `#` comment lines. JSON is
//! an array of row objects keyed by the column names.

use std::io::Write;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::experiments::SweepRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Output(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Float(f64),
    Bool(bool),
    Empty,
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

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(i) => Value::from(*i),
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Emitted as `# key: value` lines ahead of CSV output.
    pub metadata: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        w.flush()?;
        Ok(())
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
                        .map(|(c, cell)| (c.to_string(), cell.to_json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "sweep_variable",
    "value",
    "scheme",
    "p_analytic",
    "p_mc",
    "stderr",
    "n_samples",
    "seed",
    "status",
];

/// Long-format sweep table: one line per (grid point, scheme).
pub fn sweep_table(variable: &str, rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&SWEEP_COLUMNS);
    for row in rows {
        if row.results.is_empty() {
            t.push(vec![
                variable.into(),
                row.value.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                row.n_samples.into(),
                row.seed.into(),
                row.status.clone().into(),
            ]);
            continue;
        }
        for r in &row.results {
            t.push(vec![
                variable.into(),
                row.value.into(),
                r.scheme.name().into(),
                r.p_analytic.into(),
                r.mc.map(|m| m.p_hat).into(),
                r.mc.map(|m| m.stderr).into(),
                row.n_samples.into(),
                row.seed.into(),
                row.status.clone().into(),
            ]);
        }
    }
    t
}
