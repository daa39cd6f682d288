//! Fixed-point CSV writing and reading.

use std::path::Path;

use crate::error::{HarnessError, Result};

/// Six decimals, fixed point; negative zero prints as zero.
pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// An in-memory table rendered to CSV with LF line endings.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn read(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(HarnessError::MissingInput(path.to_path_buf()));
        }
        let malformed = |msg: String| HarnessError::Malformed { path: path.to_path_buf(), msg };
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(|e| malformed(e.to_string()))?;
        let header = r.headers().map_err(|e| malformed(e.to_string()))?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(|e| malformed(e.to_string()))?.iter().map(str::to_string).collect());
        }
        Ok(Self { header, rows })
    }

    /// Errors unless the header matches `expected` exactly.
    pub fn expect_header(&self, path: &Path, expected: &[&str]) -> Result<()> {
        if self.header.iter().map(String::as_str).eq(expected.iter().copied()) {
            Ok(())
        } else {
            Err(HarnessError::Malformed {
                path: path.to_path_buf(),
                msg: format!("expected header {}, found {}", expected.join(","), self.header.join(",")),
            })
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric value at `(row, column)`.
    pub fn num(&self, path: &Path, row: usize, name: &str) -> Result<f64> {
        let malformed = |msg: String| HarnessError::Malformed { path: path.to_path_buf(), msg };
        let c = self.column(name).ok_or_else(|| malformed(format!("no column '{name}'")))?;
        let cell = self.rows.get(row).and_then(|r| r.get(c)).ok_or_else(|| malformed(format!("no row {row}")))?;
        cell.parse::<f64>().map_err(|_| malformed(format!("row {row}, column '{name}': '{cell}' is not a number")))
    }

    pub fn text<'a>(&'a self, path: &Path, row: usize, name: &str) -> Result<&'a str> {
        let malformed = |msg: String| HarnessError::Malformed { path: path.to_path_buf(), msg };
        let c = self.column(name).ok_or_else(|| malformed(format!("no column '{name}'")))?;
        self.rows.get(row).and_then(|r| r.get(c)).map(String::as_str).ok_or_else(|| malformed(format!("no row {row}")))
    }
}
