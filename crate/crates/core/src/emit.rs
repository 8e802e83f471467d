//! Tabular output as CSV or as a JSON array of row objects.
//!
//! Floats are written with 17 significant digits in CSV and in shortest
//! round-trip form in JSON; both parse back to the identical `f64`.

use std::io::Write;

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
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

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Columns from a comma-separated header.
    pub fn new(header: &str) -> Self {
        Self {
            columns: header.split(',').map(str::to_owned).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", line.join(","))?;
        }
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
                        .map(|(k, c)| (k.clone(), c.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write_json(&self, out: &mut impl Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
        writeln!(out)
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("a,b,c,d");
        t.push(vec![0.1.into(), 3usize.into(), true.into(), Cell::Empty]);
        t.push(vec![(1.0 / 3.0).into(), 0usize.into(), false.into(), Some(2.5).into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,b,c,d");
        assert_eq!(lines[1], "1.0000000000000001e-1,3,true,");
        assert_eq!(lines.len(), 3);
        let back: f64 = lines[2].split(',').next().unwrap().parse().unwrap();
        assert_eq!(back.to_bits(), (1.0f64 / 3.0).to_bits());
    }

    #[test]
    fn json_keeps_column_order() {
        let mut buf = Vec::new();
        sample().write_json(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (a, d) = (text.find("\"a\"").unwrap(), text.find("\"d\"").unwrap());
        assert!(a < d);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v[1]["a"].as_f64().unwrap().to_bits(), (1.0f64 / 3.0).to_bits());
        assert!(v[0]["d"].is_null());
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        Table::new("x,y").write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y\n");
    }

    #[test]
    #[should_panic]
    fn width_mismatch_panics() {
        Table::new("x,y").push(vec![Cell::Empty]);
    }
}
