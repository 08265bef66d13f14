use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::RunError;

/// Formats `x` with 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// One CSV field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    Float(f64),
    Int(i64),
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Float(x)
    }
}

impl From<usize> for Field {
    fn from(n: usize) -> Self {
        Field::Int(n as i64)
    }
}

impl From<i64> for Field {
    fn from(n: i64) -> Self {
        Field::Int(n)
    }
}

impl From<i8> for Field {
    fn from(n: i8) -> Self {
        Field::Int(n as i64)
    }
}

impl From<bool> for Field {
    fn from(b: bool) -> Self {
        Field::Int(b as i64)
    }
}

/// In-memory CSV table with a one-line header.
#[derive(Debug, Clone)]
pub struct CsvWriter {
    columns: usize,
    text: String,
}

impl CsvWriter {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { columns: header.len(), text }
    }

    /// Appends a row; the field count must match the header.
    pub fn row<I>(&mut self, fields: I)
    where
        I: IntoIterator,
        I::Item: Into<Field>,
    {
        let mut n = 0;
        for (i, f) in fields.into_iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match f.into() {
                Field::Float(x) => self.text.push_str(&format_float(x)),
                Field::Int(k) => {
                    let _ = write!(self.text, "{k}");
                }
            }
            n += 1;
        }
        assert_eq!(n, self.columns, "row width does not match the header");
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn rows(&self) -> usize {
        self.text.lines().count() - 1
    }

    pub fn write_to(&self, path: &Path) -> Result<(), RunError> {
        fs::write(path, &self.text).map_err(|e| RunError::io(path, e))
    }
}

/// Record of one run: everything needed to reproduce it plus headline
/// results. Contains nothing that depends on the host or thread count.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub reproduces: String,
    pub code_version: String,
    pub seed: u64,
    pub parameters: Map<String, Value>,
    pub outputs: Vec<String>,
    pub summary: Map<String, Value>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest is plain data");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn header_and_rows() {
        let mut w = CsvWriter::new(&["epoch", "error"]);
        w.row([Field::from(3usize), Field::from(0.25)]);
        assert_eq!(w.as_str(), "epoch,error\n3,2.5000000000000000e-1\n");
        assert_eq!(w.rows(), 1);
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn rejects_ragged_rows() {
        CsvWriter::new(&["a", "b"]).row([1.0]);
    }
}
