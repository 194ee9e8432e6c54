//! CSV and JSON rendering with frozen column orders.

use std::str::FromStr;

use serde_json::{Map, Number, Value};

/// Bumped whenever a column is added, removed or reordered.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_float(v: f64) -> Option<String> {
    if !v.is_finite() {
        return None;
    }
    if v == 0.0 {
        return Some("0.0000000000000000e0".into());
    }
    Some(format!("{v:.16e}"))
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v).unwrap_or_else(|| "NaN".into()),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => format_float(*v)
                .and_then(|s| Number::from_str(&s).ok())
                .map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::Number((*v).into()),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Null => Value::Null,
        }
    }
}

/// Rows of one command plus an optional summary block (JSON only).
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(&'static str, Cell)>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, command: &str, params: &[(&'static str, Cell)]) -> String {
        let mut top = Map::new();
        top.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
        top.insert("command".into(), Value::from(command));
        top.insert("params".into(), object(params));
        let results = self
            .rows
            .iter()
            .map(|row| {
                let pairs: Vec<(&'static str, Cell)> = self
                    .columns
                    .iter()
                    .copied()
                    .zip(row.iter().cloned())
                    .collect();
                object(&pairs)
            })
            .collect();
        top.insert("results".into(), Value::Array(results));
        if !self.summary.is_empty() {
            top.insert("summary".into(), object(&self.summary));
        }
        let mut s =
            serde_json::to_string_pretty(&Value::Object(top)).expect("json values serialize");
        s.push('\n');
        s
    }
}

fn object(pairs: &[(&'static str, Cell)]) -> Value {
    Value::Object(
        pairs
            .iter()
            .map(|(k, v)| ((*k).to_owned(), v.json()))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &v in &[0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            let s = format_float(v).unwrap();
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(f64::NAN), None);
    }

    #[test]
    fn csv_quotes_text() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), Cell::Null]);
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",\n");
    }

    #[test]
    fn json_keeps_column_order_and_digits() {
        let mut t = Table::new(&["z", "a"]);
        t.push(vec![0.1.into(), 3u64.into()]);
        let s = t.to_json("demo", &[("lambda", 1.0.into())]);
        let z = s.find("\"z\"").unwrap();
        let a = s.find("\"a\"").unwrap();
        assert!(z < a);
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("\"schema_version\": 1"));
    }
}
