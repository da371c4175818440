//! Tabular output as CSV (with a commented config header) or JSON.

use std::io::Write;

use serde_json::{json, Value};

use super::config::{OutputFormat, RunConfig};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// A command's result: free-form notes, a header and rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub notes: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

/// Formats `v` with six significant digits, `%g` style.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => sig6(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Text(t) => t.clone(),
        Cell::Empty => String::new(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Num(v) if v.is_finite() => json!(v),
        Cell::Num(_) | Cell::Empty => Value::Null,
        Cell::Int(v) => json!(v),
        Cell::Text(t) => json!(t),
    }
}

/// Renders `table` for `command` with the resolved config echoed first.
pub fn render(command: &str, cfg: &RunConfig, table: &Table, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = format!("# v2v-blockage {command}\n");
            for line in cfg.echo_lines() {
                out.push_str(&line);
                out.push('\n');
            }
            for note in &table.notes {
                out.push_str("# ");
                out.push_str(note);
                out.push('\n');
            }
            out.push_str(&table.columns.join(","));
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(csv_cell).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = table.rows.iter().map(|r| Value::Array(r.iter().map(json_cell).collect())).collect();
            let doc = json!({
                "command": command,
                "config": cfg.echo,
                "notes": table.notes,
                "columns": table.columns,
                "rows": rows,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serialisable output");
            s.push('\n');
            s
        }
    }
}

/// Writes to `cfg.out`, or to stdout when unset.
pub fn emit(command: &str, cfg: &RunConfig, table: &Table) -> Result<()> {
    let text = render(command, cfg, table, cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.123456789, "0.123457"),
            (101.3406, "101.341"),
            (-2.5, "-2.5"),
            (9.9999996, "10"),
            (123456789.0, "1.23457e8"),
            (0.000012345678, "1.23457e-5"),
            (0.00012345678, "0.000123457"),
            (200.0, "200"),
        ];
        for (v, want) in cases {
            assert_eq!(sig6(v), want, "{v}");
        }
    }

    #[test]
    fn csv_has_header_and_echo() {
        let cfg = RunConfig::from_toml("").unwrap();
        let mut t = Table::new(&["d_tr", "mc", "trials"]);
        t.push(vec![50.0.into(), Cell::Empty, 0usize.into()]);
        let s = render("blockage-prob", &cfg, &t, OutputFormat::Csv);
        let lines: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines, ["d_tr,mc,trials", "50,,0"]);
        assert!(s.contains("# scenario.lanes = 3 # default"));
    }

    #[test]
    fn json_parses_back() {
        let cfg = RunConfig::from_toml("").unwrap();
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![0.5.into(), Cell::Empty]);
        let v: Value = serde_json::from_str(&render("distance-pdf", &cfg, &t, OutputFormat::Json)).unwrap();
        assert_eq!(v["rows"][0][0], json!(0.5));
        assert!(v["rows"][0][1].is_null());
        assert_eq!(v["command"], json!("distance-pdf"));
    }
}
