//! Plain-text tables: one header line, then whitespace-separated rows.

use std::fmt::{self, Display, Write as _};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<I, S>(header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: Display,
    {
        let row: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }

    /// Parses the output of [`Table::write`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("table has no header".into()))?
            .split_whitespace()
            .map(String::from)
            .collect::<Vec<_>>();
        let mut table = Table { header, rows: Vec::new() };
        for line in lines {
            let row: Vec<String> = line.split_whitespace().map(String::from).collect();
            if row.len() != table.header.len() {
                return Err(Error::Format(format!("row `{line}` has {} columns, expected {}", row.len(), table.header.len())));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    /// Column `name` parsed as `f64`.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("no column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| r[j].parse().map_err(|_| Error::Format(format!("`{}` is not a number", r[j]))))
            .collect()
    }
}

impl Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut line = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            line.clear();
            for (j, (c, w)) in row.iter().zip(&widths).enumerate() {
                if j > 0 {
                    line.push_str("  ");
                }
                let _ = write!(line, "{c:<w$}");
            }
            writeln!(f, "{}", line.trim_end())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut t = Table::new(["z", "value"]);
        t.push([-1.5f64, 0.25]);
        t.push([2.0f64, 1e-300]);
        let text = t.to_string();
        assert!(text.starts_with("z "));
        let back = Table::parse(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("value").unwrap(), vec![0.25, 1e-300]);
        assert!(back.column("missing").is_err());
    }

    #[test]
    #[should_panic]
    fn ragged_row_panics() {
        Table::new(["a", "b"]).push([1]);
    }
}
