//! Comment-headed CSV tables.
//!
//! Every file starts with `# `-prefixed comment lines (run configuration, seed),
//! followed by one header row and data rows. Floats are written in Rust's
//! shortest round-trip form, so reading a file back reproduces the in-memory
//! values bit for bit.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest decimal string that parses back to exactly `x`.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            comments: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Adds comment lines; multi-line text is split so each line is prefixed.
    pub fn comment(&mut self, text: &str) -> &mut Self {
        self.comments.extend(text.lines().map(str::to_owned));
        self
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push_row(row.iter().copied().map(format_f64).collect());
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Parses one column as floats.
    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing column `{name}`"),
        })?;
        let first_data_line = self.comments.len() + 2;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row[idx].trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: first_data_line + i,
                    message: format!("column `{name}`: {e}"),
                })
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(self.render().as_bytes())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    /// Strict parser: lines whose first non-blank character is `#` are
    /// comments and may only precede the header, the header must
    /// have unique non-empty names, and every row must have as many fields as
    /// the header. Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = CsvTable::default();
        let mut have_header = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.trim_start().strip_prefix('#') {
                if have_header {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "comment after header".into(),
                    });
                }
                table
                    .comments
                    .push(rest.strip_prefix(' ').unwrap_or(rest).to_owned());
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|f| f.trim().to_owned()).collect();
            if !have_header {
                for (j, name) in fields.iter().enumerate() {
                    if name.is_empty() {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("empty column name at position {j}"),
                        });
                    }
                    if fields[..j].contains(name) {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("duplicate column `{name}`"),
                        });
                    }
                }
                table.columns = fields;
                have_header = true;
            } else {
                if fields.len() != table.columns.len() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!(
                            "expected {} fields, found {}",
                            table.columns.len(),
                            fields.len()
                        ),
                    });
                }
                table.rows.push(fields);
            }
        }
        if !have_header {
            return Err(Error::Parse {
                line: 0,
                message: "missing header row".into(),
            });
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut t = CsvTable::new(["a", "b"]);
        t.comment("seed = 7\nscenario = \"x\"");
        let values = [0.1 + 0.2, -1.0e-300, 6.02214076e23, f64::MIN_POSITIVE, -0.0];
        for v in values {
            t.push_numbers(&[v, 1.0 / 3.0]);
        }
        let back = CsvTable::parse(&t.render()).unwrap();
        assert_eq!(back, t);
        let a = back.column_f64("a").unwrap();
        for (x, y) in a.iter().zip(values) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn rejects_ragged_rows_and_late_comments() {
        assert!(CsvTable::parse("a,b\n1,2\n3\n").is_err());
        assert!(CsvTable::parse("a,b\n1,2\n# late\n").is_err());
        assert!(CsvTable::parse("a,a\n").is_err());
        assert!(CsvTable::parse("# only a comment\n").is_err());
        assert!(CsvTable::parse("a,,b\n").is_err());
        // Indented comments are still comments.
        assert!(CsvTable::parse("x\n1\n   # late\n").is_err());
        assert_eq!(CsvTable::parse("  # c\nx\n").unwrap().comments, ["c"]);
    }

    #[test]
    fn reports_bad_numbers_with_line() {
        let t = CsvTable::parse("# c\nx\n1.5\nnope\n").unwrap();
        match t.column_f64("x") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }
}
