//! CSV and JSON files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// 17 significant digits: exact round trip for `f64`.
pub fn fmt_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Column-oriented CSV with a header row.
pub fn csv_string(header: &[&str], columns: &[&[f64]]) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..rows {
        for (j, c) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_real(c[i]));
        }
        out.push('\n');
    }
    out
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    std::fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Parsed numeric CSV, addressed by column name.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    columns: HashMap<String, Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str, source: &str) -> CliResult<Table> {
        let schema = |msg: String| CliError::Validation(format!("{source}: {msg}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| schema("empty file".into()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut data: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(schema(format!("row {} has {} fields, expected {}", row + 1, fields.len(), header.len())));
            }
            for (col, f) in fields.iter().enumerate() {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| schema(format!("row {} column '{}' is not a number", row + 1, header[col])))?;
                data[col].push(v);
            }
        }
        let columns = header.iter().cloned().zip(data).collect();
        Ok(Table { header, columns })
    }

    pub fn read(path: &Path) -> CliResult<Table> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Table::parse(&text, &path.display().to_string())
    }

    /// Fails with a schema error naming the missing column.
    pub fn column(&self, name: &str) -> CliResult<&[f64]> {
        self.columns
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| CliError::Validation(format!("schema: missing column '{name}'")))
    }

    pub fn require(&self, names: &[&str]) -> CliResult<()> {
        for n in names {
            self.column(n)?;
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.columns.values().next().map_or(0, |c| c.len())
    }
}

/// Free-form text row writer for summary files with mixed columns.
pub fn text_row(fields: &[String]) -> String {
    let mut s = String::new();
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{f}");
    }
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 123456789.12345679, std::f64::consts::PI] {
            assert_eq!(fmt_real(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_real(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_round_trip_and_schema_errors() {
        let x = [0.0, 0.5];
        let y = [1.0, -2.25];
        let text = csv_string(&["x", "y"], &[&x, &y]);
        let t = Table::parse(&text, "t").unwrap();
        assert_eq!(t.column("y").unwrap(), &y);
        assert_eq!(t.rows(), 2);
        assert!(matches!(t.column("w"), Err(CliError::Validation(_))));
        assert!(Table::parse("x,y\n1\n", "t").is_err());
        assert!(Table::parse("x\nabc\n", "t").is_err());
        assert!(Table::parse("", "t").is_err());
    }
}
