//! Scenario tables and their CSV form.
//!
//! A file starts with `#` metadata lines (`# key=value`, sorted by key),
//! followed by a header row and data rows. Reals use 17 significant digits
//! so a rerun with the same config is byte-identical.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    pub fn as_f64(self) -> f64 {
        match self {
            Cell::Int(i) => i as f64,
            Cell::Real(x) => x,
        }
    }

    fn render(self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) if x.is_nan() => "nan".into(),
            Cell::Real(x) if x.is_infinite() => if x > 0.0 { "inf" } else { "-inf" }.into(),
            // adding 0.0 maps -0.0 to 0.0
            Cell::Real(x) => format!("{:.16e}", x + 0.0),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            metadata: BTreeMap::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of a named column.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column(name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64()).collect())
    }

    /// Sorts rows lexicographically by the leading `keys` columns.
    pub fn sort_by_leading(&mut self, keys: usize) {
        self.rows.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .take(keys)
                .map(|(x, y)| x.as_f64().total_cmp(&y.as_f64()))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut out = BufWriter::new(out);
        let io = |e: std::io::Error| Error::Io(e.to_string());
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}").map_err(io)?;
        }
        out.flush().map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render())).map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }
}

/// Writes `table` to `path`, creating or truncating the file.
pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    table.write(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_formatting() {
        let mut t = Table::new(["m", "x"]);
        t.metadata.insert("b".into(), "2".into());
        t.metadata.insert("a".into(), "1".into());
        t.push(vec![Cell::Int(1), Cell::Real(0.1)]).unwrap();
        t.push(vec![Cell::Int(-1), Cell::Real(f64::INFINITY)]).unwrap();
        t.sort_by_leading(1);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# a=1\n# b=2\nm,x\n-1,inf\n1,1.0000000000000001e-1\n"
        );
        assert!(t.push(vec![Cell::Int(0)]).is_err());
    }
}
