//! CSV tables, checks and the summary document.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || x.is_nan() || x.is_infinite() {
        return x.to_string();
    }
    let mag = x.abs();
    if (1e-5..1e16).contains(&mag) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(v) => v.clone(),
            Cell::Bool(v) => v.to_string(),
        }
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::Int(v as i64)
            }
        }
    )*};
}
int_cell!(i32, i64, u32, u64, usize);

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

/// Builds a `Vec<Cell>` from heterogeneous values.
#[macro_export]
macro_rules! cells {
    ($($v:expr),* $(,)?) => { vec![$($crate::output::Cell::from($v)),*] };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem suffix; empty for the main results table.
    pub name: String,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&'static str]) -> Self {
        Self {
            name: name.to_string(),
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        Ok(w.into_inner()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub observed: Value,
    pub threshold: Value,
    pub detail: String,
}

impl Check {
    /// Passes when `observed <= limit`; NaN fails.
    pub fn at_most(name: &str, observed: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: observed <= limit,
            observed: float_value(observed),
            threshold: Value::String(format!("<= {}", format_float(limit))),
            detail: detail.into(),
        }
    }

    pub fn within(name: &str, observed: f64, lo: f64, hi: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: observed >= lo && observed <= hi,
            observed: float_value(observed),
            threshold: Value::String(format!("[{}, {}]", format_float(lo), format_float(hi))),
            detail: detail.into(),
        }
    }

    pub fn holds(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            observed: Value::Bool(passed),
            threshold: Value::Bool(true),
            detail: detail.into(),
        }
    }

    pub fn equals(name: &str, observed: Value, expected: Value, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: observed == expected,
            observed,
            threshold: expected,
            detail: detail.into(),
        }
    }
}

/// JSON number, or a string for non-finite values.
pub fn float_value(x: f64) -> Value {
    // folds -0.0 into 0.0
    let x = x + 0.0;
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub inputs_hash: String,
    pub passed: bool,
    pub metrics: Value,
    pub checks: Vec<Check>,
    pub provenance: Value,
}

/// Writes each table as `<stem>[_<name>].csv` and the summary as
/// `<stem>_summary.json`; returns the written paths.
pub fn write_artifacts(dir: &Path, stem: &str, tables: &[Table], summary: &Summary) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut written = Vec::new();
    for table in tables {
        let file = if table.name.is_empty() {
            format!("{stem}.csv")
        } else {
            format!("{stem}_{}.csv", table.name)
        };
        let path = dir.join(file);
        fs::write(&path, table.to_csv()?).with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path);
    }
    let path = dir.join(format!("{stem}_summary.json"));
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.5e-300, 6.02e23, -7.25, 1e-5, 123456.789, f64::MIN_POSITIVE] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(1e-7), "1e-7");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new("", &["a", "b"]);
        t.push(cells!["x,y", 1.5]);
        t.push(cells![3usize, true]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "a,b\n\"x,y\",1.5\n3,true\n");
    }

    #[test]
    fn check_constructors() {
        assert!(Check::at_most("x", 0.1, 0.2, "").passed);
        assert!(!Check::at_most("x", f64::NAN, 0.2, "").passed);
        assert!(Check::within("x", 0.5, 0.35, 0.65, "").passed);
        assert!(!Check::within("x", 1.2, 0.35, 0.65, "").passed);
    }
}
