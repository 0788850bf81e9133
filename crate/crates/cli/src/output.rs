use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{Map, Value};

use crate::config::Format;

/// 12 significant digits, scientific, locale independent; -0 prints as 0.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => num(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            // Round-trip through the fixed text form so JSON and CSV agree.
            Cell::Num(v) if v.is_finite() => Value::from(num(*v).parse::<f64>().expect("formatted float parses")),
            Cell::Num(_) => Value::Null,
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(Vec::new());
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv))?;
                }
                Ok(w.into_inner()?)
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .header
                            .iter()
                            .zip(row)
                            .map(|(k, c)| (k.to_string(), c.json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut out = serde_json::to_vec_pretty(&rows)?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

pub fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

pub fn write_file(dir: &Path, stem: &str, format: Format, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", extension(format)));
    fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

/// Writes to `<dir>/<stem>.<ext>` when a directory is given, else stdout.
pub fn emit(table: &Table, format: Format, dir: Option<&Path>, stem: &str) -> Result<()> {
    let bytes = table.render(format)?;
    match dir {
        Some(dir) => {
            ensure_dir(dir)?;
            let path = write_file(dir, stem, format, &bytes)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

/// File-name friendly rendering of a time value.
pub fn time_tag(t: f64) -> String {
    format!("{t}").replace('-', "m")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_precision() {
        assert_eq!(num(0.49077), "4.90770000000e-1");
        assert_eq!(num(-0.0), "0.00000000000e0");
        assert_eq!(num(1234.5), "1.23450000000e3");
    }

    #[test]
    fn csv_and_json_shapes() {
        let mut t = Table::new(vec!["n", "x", "pass"]);
        t.push(vec![1usize.into(), 0.25.into(), true.into()]);
        let csv = String::from_utf8(t.render(Format::Csv).unwrap()).unwrap();
        assert_eq!(csv, "n,x,pass\n1,2.50000000000e-1,true\n");
        let json: Value = serde_json::from_slice(&t.render(Format::Json).unwrap()).unwrap();
        assert_eq!(json, serde_json::json!([{"n": 1, "x": 0.25, "pass": true}]));
    }
}
