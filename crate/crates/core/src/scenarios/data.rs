//! Column data files.
//!
//! ```text
//! # free-text comment lines
//! # columns: freq\tdensity
//! # units: MHz\tarb
//! -60\t1.25e-5
//! ```
//!
//! Fields are tab-separated; numbers use the shortest decimal that parses
//! back to the same `f64`, so a write/parse/write cycle is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DataTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub units: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Shortest round-trip decimal; exponent form outside [1e-4, 1e15).
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl DataTable {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            comments: Vec::new(),
            columns: columns.iter().map(|(c, _)| c.to_string()).collect(),
            units: columns.iter().map(|(_, u)| u.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "# columns: {}", self.columns.join("\t"));
        let _ = writeln!(out, "# units: {}", self.units.join("\t"));
        for r in &self.rows {
            let fields: Vec<String> = r.iter().map(|v| format_float(*v)).collect();
            let _ = writeln!(out, "{}", fields.join("\t"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut t = DataTable::default();
        let mut have_cols = false;
        let mut have_units = false;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let err = |msg: String| Error::Format { line: lineno, msg };
            if let Some(c) = line.strip_prefix('#') {
                let c = c.strip_prefix(' ').unwrap_or(c);
                if let Some(cols) = c.strip_prefix("columns: ") {
                    t.columns = cols.split('\t').map(str::to_string).collect();
                    have_cols = true;
                } else if let Some(units) = c.strip_prefix("units: ") {
                    t.units = units.split('\t').map(str::to_string).collect();
                    have_units = true;
                } else if have_cols {
                    return Err(err("comment after the column header".into()));
                } else {
                    t.comments.push(c.to_string());
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !have_cols || !have_units {
                return Err(err("data before the column and unit headers".into()));
            }
            let row = line
                .split('\t')
                .map(|f| f.parse::<f64>().map_err(|e| err(format!("bad number {f:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != t.columns.len() {
                return Err(err(format!("{} fields, expected {}", row.len(), t.columns.len())));
            }
            t.rows.push(row);
        }
        if !have_cols || !have_units {
            return Err(Error::Format { line: 0, msg: "missing column or unit header".into() });
        }
        if t.units.len() != t.columns.len() {
            return Err(Error::Format { line: 0, msg: "unit count differs from column count".into() });
        }
        Ok(t)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
