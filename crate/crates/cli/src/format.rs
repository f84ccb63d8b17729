//! Number formatting and the three output renderings.

use serde_json::{Map, Value};

/// Significant digits of every printed number.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// `%.9g`-style rendering with trailing zeros removed.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A JSON number rounded to [`SIGNIFICANT_DIGITS`]; non-finite values become null.
pub fn jnum(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = num(x).parse().expect("formatted number parses");
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

/// Rounds every number inside `v`.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => jnum(x),
            _ => Value::Number(n),
        },
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => jnum(*x),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
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
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Space-aligned columns.
    pub fn to_text(&self) -> String {
        let rendered: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::render).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                rendered
                    .iter()
                    .map(|r| r[j].len())
                    .chain([c.len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.columns);
        for r in &rendered {
            out.push_str(&line(r));
        }
        out
    }

    pub fn rows_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
                .collect(),
        )
    }
}

/// Everything a command produces; the format flag picks the rendering.
#[derive(Debug, Clone)]
pub struct Output {
    pub json: Value,
    pub summary: Vec<(String, String)>,
    pub table: Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&round_json(self.json.clone()))
                    .expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => self.table.to_csv(),
            Format::Text => {
                let mut out = String::new();
                let width = self.summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in &self.summary {
                    out.push_str(&format!("{k:<width$}  {v}\n"));
                }
                if !self.table.columns.is_empty() {
                    if !out.is_empty() {
                        out.push('\n');
                    }
                    out.push_str(&self.table.to_text());
                }
                out
            }
        }
    }
}

/// Builds a JSON object from key/value pairs, keeping insertion order.
pub fn object(pairs: impl IntoIterator<Item = (&'static str, Value)>) -> Value {
    let mut map = Map::new();
    for (k, v) in pairs {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(2.745237800123), "2.7452378");
        assert_eq!(num(3.0246884927), "3.02468849");
        assert_eq!(num(3.0), "3");
        assert_eq!(num(0.0374906), "0.0374906");
        assert_eq!(num(-1.5e-7), "-1.5e-07");
        assert_eq!(num(123456789012.0), "1.23456789e+11");
        assert_eq!(num(9.9999999999), "10");
        assert_eq!(num(0.00012345678912), "0.000123456789");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn json_rounding() {
        assert_eq!(jnum(2.745237800123).to_string(), "2.7452378");
        assert_eq!(jnum(f64::INFINITY), Value::Null);
        let v = round_json(serde_json::json!({"a": [1.23456789123, 2], "b": "x"}));
        assert_eq!(v.to_string(), r#"{"a":[1.23456789,2],"b":"x"}"#);
    }

    #[test]
    fn csv_and_text() {
        let mut t = Table::new(["alpha", "phi"]);
        t.push(vec![1.0.into(), 0.36602540378.into()]);
        t.push(vec![2.0.into(), Cell::Empty]);
        assert_eq!(t.to_csv(), "alpha,phi\n1,0.366025404\n2,\n");
        assert_eq!(t.to_text(), "alpha          phi\n    1  0.366025404\n    2\n");
    }
}
