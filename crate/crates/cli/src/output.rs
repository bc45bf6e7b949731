//! Data tables and their CSV / JSON encodings.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::CliError;

/// Significant digits of CSV numbers.
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str) -> Column {
    Column { name, unit: "1" }
}

pub const fn col_si(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

/// Rows of numbers keyed by the first column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Stable sort on the key column, so row order never depends on scheduling.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    }

    pub fn units(&self) -> Value {
        let mut m = serde_json::Map::new();
        for c in &self.columns {
            m.insert(c.name.to_string(), Value::String(c.unit.to_string()));
        }
        Value::Object(m)
    }
}

/// `%.12g`-style decimal: 12 significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", CSV_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..CSV_DIGITS as i32).contains(&exp) {
        let decimals = (CSV_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_csv(path: &Path, table: &Table) -> Result<(), CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::Output {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| fail(&e))?;
    w.write_record(table.columns.iter().map(|c| c.name)).map_err(|e| fail(&e))?;
    for row in &table.rows {
        w.write_record(row.iter().map(|x| format_sig(*x))).map_err(|e| fail(&e))?;
    }
    w.flush().map_err(|e| fail(&e))
}

pub fn table_json(table: &Table) -> Value {
    json!({
        "columns": table.columns.iter().map(|c| c.name).collect::<Vec<_>>(),
        "units": table.units(),
        "rows": table.rows,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Output {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// `<out>.<ext>`, keeping any dots already in the prefix.
pub fn with_suffix(out: &Path, ext: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-0.5), "-0.5");
        assert_eq!(format_sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_sig(9.0726), "9.0726");
        assert_eq!(format_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_sig(1.5e-9), "1.5e-9");
        assert_eq!(format_sig(0.000123456789012345), "0.000123456789012");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(f64::NAN), "nan");
    }

    #[test]
    fn rounding_that_carries_into_the_exponent() {
        assert_eq!(format_sig(9.9999999999999), "10");
        assert_eq!(format_sig(999999999999.7), "1e12");
    }

    #[test]
    fn round_trips_to_twelve_digits() {
        for &x in &[1.0 / 3.0, 2.0e-7 / 3.0, 7.0e20 / 9.0, -12345.678901234] {
            let back: f64 = format_sig(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11, "{x} -> {back}");
        }
    }

    #[test]
    fn sort_keys_on_first_column() {
        let mut t = Table::new(vec![col("a"), col("b")]);
        t.push(vec![2.0, 0.0]);
        t.push(vec![1.0, 1.0]);
        t.sort();
        assert_eq!(t.rows[0], vec![1.0, 1.0]);
    }

    #[test]
    fn suffix_keeps_dots() {
        assert_eq!(with_suffix(Path::new("run.v2"), "csv"), PathBuf::from("run.v2.csv"));
    }
}
