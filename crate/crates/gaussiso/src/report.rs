//! Deterministic CSV reports and pass/fail tallies.
//!
//! Output is built in memory in row order and written in one call, so a
//! report is a pure function of the values pushed into it: same inputs,
//! same bytes.  Floats are printed as `{:.12e}` everywhere.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Field {
    Text(String),
    Num(f64),
    Int(u64),
    Flag(bool),
}

impl Field {
    pub fn text(s: impl Into<String>) -> Self {
        Field::Text(s.into())
    }

    fn render(&self) -> String {
        match self {
            Field::Text(s) => escape(s),
            Field::Num(v) => format!("{v:.12e}"),
            Field::Int(n) => n.to_string(),
            Field::Flag(b) => String::from(if *b { "true" } else { "false" }),
        }
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<usize> for Field {
    fn from(n: usize) -> Self {
        Field::Int(n as u64)
    }
}

impl From<u64> for Field {
    fn from(n: u64) -> Self {
        Field::Int(n)
    }
}

impl From<bool> for Field {
    fn from(b: bool) -> Self {
        Field::Flag(b)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(String::from(s))
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

/// Quote a cell only when it contains a delimiter, quote, or newline.
fn escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        let mut out = String::with_capacity(s.len() + 2);
        out.push('"');
        for c in s.chars() {
            if c == '"' {
                out.push('"');
            }
            out.push(c);
        }
        out.push('"');
        out
    } else {
        String::from(s)
    }
}

/// In-memory CSV table with a fixed header; rows must match its arity.
#[derive(Debug, Clone)]
pub struct Report {
    columns: usize,
    buf: String,
    rows: usize,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Report {
            columns: columns.len(),
            buf,
            rows: 0,
        }
    }

    pub fn row(&mut self, cells: Vec<Field>) -> Result<()> {
        if cells.len() != self.columns {
            return Err(Error::Precondition(format!(
                "report row has {} cells, header has {}",
                cells.len(),
                self.columns
            )));
        }
        let mut first = true;
        for c in cells {
            if !first {
                self.buf.push(',');
            }
            first = false;
            self.buf.push_str(&c.render());
        }
        self.buf.push('\n');
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    /// Single whole-buffer write; no partial files on failure paths
    /// earlier than the write itself.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        fs::write(path, self.buf.as_bytes()).map_err(Error::Io)
    }
}

/// Running pass/fail count with the one-line verdict the runners print.
#[derive(Debug, Clone, Copy, Default)]
pub struct Summary {
    pub passed: usize,
    pub total: usize,
}

impl Summary {
    pub fn tick(&mut self, ok: bool) {
        self.total += 1;
        if ok {
            self.passed += 1;
        }
    }

    pub fn merge(&mut self, other: Summary) {
        self.passed += other.passed;
        self.total += other.total;
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn line(&self) -> String {
        if self.all_passed() {
            format!("PASS {}/{}", self.passed, self.total)
        } else {
            format!("FAIL {}/{}", self.passed, self.total)
        }
    }
}
