//! Tabular output shared by every subcommand. CSV and JSON are rendered from
//! the same rounded cells, so both formats carry identical values.

use serde::Serialize;
use serde_json::{json, Map, Value};

/// Significant digits kept in printed floats.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
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

/// Rounds to [`SIGNIFICANT_DIGITS`] and returns the shortest value that
/// prints back to the same digits.
pub fn round_significant(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        let r = round_significant(v);
        let mag = r.abs();
        if r == 0.0 {
            // also catches -0
            "0".into()
        } else if !(1e-4..1e15).contains(&mag) {
            format!("{r:e}")
        } else {
            r.to_string()
        }
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // non-finite floats become null
            Cell::Float(v) => json!(round_significant(*v)),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(c, v)| ((*c).to_owned(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    /// Top-level JSON record: tool version, the configuration and the rows.
    pub fn to_json<C: Serialize>(&self, command: &str, config: &C) -> String {
        let doc = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": config,
            "rows": self.json_rows(),
        });
        let mut s = serde_json::to_string_pretty(&doc).unwrap_or_else(|_| "{}".into());
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(2.0), "2");
        assert_eq!(format_float(123_456_789.123_456_7), "123456789.123");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(0.7310585786300049), "0.73105857863");
        assert_eq!(format_float(2.144066815221e-12), "2.14406681522e-12");
        assert_eq!(format_float(1e-10), "1e-10");
        assert_eq!(format_float(3.0e20), "3e20");
    }

    #[test]
    fn csv_and_json_carry_the_same_values() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Cell::from(1.0 / 7.0), Cell::Empty, Cell::from(3usize)]);
        let csv = t.to_csv();
        assert_eq!(csv, "a,b,c\n0.142857142857,,3\n");
        let rows = t.json_rows();
        assert_eq!(rows[0]["a"].as_f64().unwrap().to_string(), "0.142857142857");
        assert!(rows[0]["b"].is_null());
    }

    #[test]
    fn text_with_commas_is_quoted() {
        assert_eq!(Cell::from("x, y").csv(), "\"x, y\"");
        assert_eq!(Cell::from("plain").csv(), "plain");
    }
}
