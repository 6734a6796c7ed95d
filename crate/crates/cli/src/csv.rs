//! Byte-stable CSV emission.

use crate::error::{CliError, Result};

/// Formats `v` like C's `%.12g`: 12 significant digits, trailing zeros
/// removed, scientific notation outside `1e-4 <= |v| < 1e12`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let digits = (11 - exp) as usize;
        strip_zeros(&format!("{v:.digits$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Column-oriented table rendered in one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new() -> Self {
        Self { header: Vec::new(), columns: Vec::new() }
    }

    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.header.push(name.into());
        self.columns.push(values);
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn render(&self) -> Result<String> {
        let rows = self.rows();
        if let Some((name, col)) = self.header.iter().zip(&self.columns).find(|(_, c)| c.len() != rows) {
            return Err(CliError::Numerical(format!("column {name} has {} rows, expected {rows}", col.len())));
        }
        let mut out = self.header.join(",");
        out.push('\n');
        for r in 0..rows {
            for (c, col) in self.columns.iter().enumerate() {
                let v = col[r];
                if !v.is_finite() {
                    return Err(CliError::Numerical(format!("non-finite {} at row {r}", self.header[c])));
                }
                if c > 0 {
                    out.push(',');
                }
                out.push_str(&format_number(v));
            }
            out.push('\n');
        }
        Ok(out)
    }
}

impl Default for Table {
    fn default() -> Self {
        Self::new()
    }
}
