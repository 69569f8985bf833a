//! Delimited-text ingestion shared by the data loaders.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One data row, with its fields reordered to match the requested columns.
#[derive(Debug, Clone)]
pub struct Row {
    pub line: u64,
    pub fields: Vec<String>,
    path: PathBuf,
    columns: Vec<String>,
}

impl Row {
    pub fn number(&self, index: usize) -> Result<f64> {
        let text = self.fields[index].trim();
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.error(format!("column '{}': '{text}' is not a finite number", self.columns[index])))
    }

    pub fn text(&self, index: usize) -> &str {
        self.fields[index].trim()
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line,
            message: message.into(),
        }
    }
}

/// Reads a comma-separated table with a header row. Every name in `columns`
/// must be present; extra columns are ignored. Lines starting with `#` are
/// comments.
pub fn read_table<R: std::io::Read>(reader: R, path: &Path, columns: &[&str]) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(parse_err(e.position().map_or(1, |p| p.line()), e.to_string())),
    };
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let mut index = Vec::with_capacity(columns.len());
    for c in columns {
        match headers.iter().position(|h| h == *c) {
            Some(i) => index.push(i),
            None => {
                return Err(parse_err(
                    1,
                    format!(
                        "missing column '{c}' (expected header: {})",
                        columns.join(",")
                    ),
                ))
            }
        }
    }
    let owned: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push(Row {
            line,
            fields: index.iter().map(|&i| rec[i].to_string()).collect(),
            path: path.to_path_buf(),
            columns: owned.clone(),
        });
    }
    Ok(rows)
}
