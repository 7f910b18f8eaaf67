//! Tables and their CSV / JSON renderings.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::spec::RunSpec;

/// Significant digits in CSV output.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
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

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_sig(*x, SIGNIFICANT_DIGITS),
            Cell::Int(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => Value::from(*x),
            Cell::Num(x) => Value::from(fmt_sig(*x, SIGNIFICANT_DIGITS)),
            Cell::Int(x) => Value::from(*x),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Numeric value at `row`, `name` (integers widened).
    pub fn num(&self, row: usize, name: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(name)?)? {
            Cell::Num(x) => Some(*x),
            Cell::Int(x) => Some(*x as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub fn write_csv<W: Write + ?Sized>(w: &mut W, spec: &RunSpec, table: &Table) -> io::Result<()> {
    let meta = serde_json::to_string(spec).map_err(io::Error::other)?;
    writeln!(w, "# {meta}")?;
    writeln!(w, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(Cell::csv).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_json<W: Write + ?Sized>(w: &mut W, spec: &RunSpec, table: &Table) -> io::Result<()> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| (c.to_string(), v.json()))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let doc = serde_json::json!({
        "spec": spec,
        "columns": table.columns,
        "rows": rows,
    });
    serde_json::to_writer_pretty(&mut *w, &doc).map_err(io::Error::other)?;
    writeln!(w)
}

/// `%g`-style formatting with `digits` significant digits and trailing
/// zeros removed.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= p as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(1.906023757563831, 12), "1.90602375756");
        assert_eq!(fmt_sig(0.1, 12), "0.1");
        assert_eq!(fmt_sig(100.0, 12), "100");
        assert_eq!(fmt_sig(1e-300, 12), "1e-300");
        assert_eq!(fmt_sig(-2.5e15, 12), "-2.5e15");
        assert_eq!(fmt_sig(9.9999999999999, 12), "10");
        assert_eq!(fmt_sig(0.000123456789012345, 12), "0.000123456789012");
        assert_eq!(fmt_sig(f64::INFINITY, 12), "inf");
    }

    #[test]
    fn twelve_digits_round_trip_to_relative_1e_11() {
        for x in [std::f64::consts::PI, 7.597625010352075, 1.23456789e-7, 6.02214076e23] {
            let y: f64 = fmt_sig(x, 12).parse().unwrap();
            assert!(((y - x) / x).abs() < 1e-11, "{x} -> {y}");
        }
    }
}
