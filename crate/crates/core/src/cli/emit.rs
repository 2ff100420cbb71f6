//! Plot-ready tables written as CSV or JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value as Json};

use super::config::Format;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Str(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Str(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Str(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Str(if x { "true" } else { "false" }.into())
    }
}

/// A named table. The primary table of an experiment has `name == None`;
/// the others are written next to it as `<stem>.<name>.<ext>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: Option<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: Option<&str>, columns: &[&str]) -> Self {
        Table { name: name.map(str::to_string), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros removed.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        trim_zeros(&s)
    } else {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&table.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in &table.rows {
        let line: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Float(x) => format_float(*x),
                Cell::Int(i) => i.to_string(),
                Cell::Str(s) => csv_field(s),
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn cell_json(c: &Cell) -> Json {
    match c {
        Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number),
        Cell::Int(i) => Json::from(*i),
        Cell::Str(s) => Json::from(s.clone()),
    }
}

pub fn to_json(table: &Table, metadata: &Json) -> String {
    let data: Vec<Json> = table
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (k, v) in table.columns.iter().zip(row) {
                m.insert(k.clone(), cell_json(v));
            }
            Json::Object(m)
        })
        .collect();
    let mut top = Map::new();
    top.insert("metadata".into(), metadata.clone());
    top.insert("data".into(), Json::Array(data));
    let mut s = serde_json::to_string_pretty(&Json::Object(top)).expect("serializable");
    s.push('\n');
    s
}

/// Path of a secondary table next to the primary output.
pub fn sibling_path(primary: &Path, name: &str, format: Format) -> PathBuf {
    let stem = primary.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    primary.with_file_name(format!("{stem}.{name}.{}", format.extension()))
}

/// Writes every table and returns the paths in order.
pub fn emit(tables: &[Table], primary: &Path, format: Format, metadata: &Json) -> Result<Vec<PathBuf>> {
    if let Some(dir) = primary.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut written = Vec::with_capacity(tables.len());
    for t in tables {
        let path = match &t.name {
            None => primary.to_path_buf(),
            Some(n) => sibling_path(primary, n, format),
        };
        let body = match format {
            Format::Csv => to_csv(t),
            Format::Json => {
                let mut meta = metadata.clone();
                if let (Json::Object(m), Some(n)) = (&mut meta, &t.name) {
                    m.insert("table".into(), Json::from(n.clone()));
                }
                to_json(t, &meta)
            }
        };
        let mut f = fs::File::create(&path)?;
        f.write_all(body.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(866969.1234567891), "866969.123457");
        assert_eq!(format_float(-0.5), "-0.5");
        assert_eq!(format_float(1.5e-7), "1.5e-07");
        assert_eq!(format_float(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_float(1e15), "1e+15");
        assert_eq!(format_float(999999999999.9), "1e+12");
        assert_eq!(format_float(0.0001), "0.0001");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(None, &["a", "b"]);
        assert_eq!(to_csv(&t), "a,b\n");
    }

    #[test]
    fn json_keeps_column_order() {
        let mut t = Table::new(None, &["z", "a"]);
        t.push(vec![1.5.into(), "x".into()]);
        let s = to_json(&t, &Json::Null);
        assert!(s.find("\"z\"").unwrap() < s.find("\"a\"").unwrap());
    }

    #[test]
    fn sibling_names() {
        let p = sibling_path(Path::new("out/gate.csv"), "trace", Format::Csv);
        assert_eq!(p, PathBuf::from("out/gate.trace.csv"));
    }
}
