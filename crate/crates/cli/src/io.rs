//! CSV input and output.

use std::fs;
use std::path::Path;

use mint_core::{BlockedSample, PointSet};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// A CSV file with a header row, kept as text until columns are selected.
#[derive(Debug, Clone)]
pub struct Table {
    headers: Vec<String>,
    /// `(line number, fields)` for each data row.
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    pub fn read(path: &Path) -> CliResult<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| CliError::parse(format!("{}: bad header: {e}", path.display())))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
            let line = record.position().map_or(0, |p| p.line());
            rows.push((line, record.iter().map(str::to_string).collect()));
        }
        Ok(Table { headers, rows })
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Resolves a comma-separated list of column names or 1-based indices.
    /// Names take precedence over indices.
    pub fn resolve(&self, spec: &str) -> CliResult<Vec<usize>> {
        let cols: Vec<usize> = spec
            .split(',')
            .map(|item| {
                let item = item.trim();
                if let Some(i) = self.headers.iter().position(|h| h == item) {
                    return Ok(i);
                }
                match item.parse::<usize>() {
                    Ok(i) if (1..=self.headers.len()).contains(&i) => Ok(i - 1),
                    _ => Err(CliError::args(format!("no column '{item}' in the input"))),
                }
            })
            .collect::<CliResult<_>>()?;
        if cols.is_empty() {
            return Err(CliError::args("empty column selection"));
        }
        Ok(cols)
    }

    /// Numeric matrix of the selected columns, in selection order.
    pub fn numeric(&self, cols: &[usize]) -> CliResult<PointSet> {
        let mut data = Vec::with_capacity(self.rows.len() * cols.len());
        for (line, fields) in &self.rows {
            for &c in cols {
                let cell = fields.get(c).map(String::as_str).unwrap_or("");
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => data.push(v),
                    _ => {
                        return Err(CliError::parse(format!(
                            "line {line}, column {} ('{}'): cannot parse '{cell}' as a finite number",
                            c + 1,
                            self.headers[c]
                        )))
                    }
                }
            }
        }
        Ok(PointSet::new(data, self.rows.len(), cols.len())?)
    }
}

/// Hex SHA-256 of a file's contents.
pub fn file_sha256(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::parse(format!("cannot write {}: {e}", path.display())))
}

/// CSV with header `x1,…,y1,…` and every value at 17 significant digits.
/// A sample with more than two blocks is labelled `b1_1,…`.
pub fn sample_csv(sample: &BlockedSample) -> String {
    let mut header = Vec::new();
    for (i, block) in sample.blocks().iter().enumerate() {
        for j in 1..=block.len() {
            header.push(match (sample.num_blocks(), i) {
                (2, 0) => format!("x{j}"),
                (2, _) => format!("y{j}"),
                _ => format!("b{}_{j}", i + 1),
            });
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for row in sample.points().rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
