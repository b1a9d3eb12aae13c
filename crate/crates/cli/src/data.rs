//! CSV ingestion and output.

use std::io::Write;
use std::path::Path;

use gp_core::Matrix;

use crate::error::CliError;

/// A CSV file held as strings, with the 1-based line of every record.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub name: String,
    pub headers: Vec<String>,
    pub records: Vec<(u64, Vec<String>)>,
}

pub fn read_table(path: &Path) -> Result<RawTable, CliError> {
    let name = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(format!("{name}: {e}")))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(&name, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(&name, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec.iter().map(str::to_owned).collect()));
    }
    if headers.iter().all(String::is_empty) || records.is_empty() {
        return Err(CliError::input(format!(
            "{name}: empty data (no data rows)"
        )));
    }
    Ok(RawTable {
        name,
        headers,
        records,
    })
}

fn csv_error(name: &str, e: csv::Error) -> CliError {
    match e.position() {
        Some(p) => CliError::input(format!("{name}:{}: {e}", p.line())),
        None => CliError::input(format!("{name}: {e}")),
    }
}

impl RawTable {
    pub fn cols(&self) -> usize {
        self.headers.len()
    }

    pub fn rows(&self) -> usize {
        self.records.len()
    }

    pub fn has_label_column(&self) -> bool {
        self.headers.last().is_some_and(|h| h == "label")
    }

    /// Parses columns `first..last` as numbers; errors name line and column.
    pub fn numeric(&self, first: usize, last: usize) -> Result<Matrix, CliError> {
        let width = last - first;
        let mut data = Vec::with_capacity(self.rows() * width);
        for (line, rec) in &self.records {
            for (j, field) in rec.iter().enumerate().take(last).skip(first) {
                let v: f64 = field.parse().map_err(|_| {
                    CliError::input(format!(
                        "{}:{line}:{}: cannot parse {field:?} as a number (column {:?})",
                        self.name,
                        j + 1,
                        self.headers[j]
                    ))
                })?;
                if !v.is_finite() {
                    return Err(CliError::input(format!(
                        "{}:{line}:{}: non-finite value {field:?}",
                        self.name,
                        j + 1
                    )));
                }
                data.push(v);
            }
        }
        Matrix::from_row_slice(self.rows(), width, &data)
            .map_err(|e| CliError::input(e.to_string()))
    }

    pub fn strings(&self, col: usize) -> Vec<String> {
        self.records.iter().map(|(_, r)| r[col].clone()).collect()
    }
}

/// Full-precision float formatting: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a header and numeric rows as CSV.
pub fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::input(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Column names `prefix` (one column) or `prefix_1..prefix_k`.
pub fn numbered(prefix: &str, k: usize) -> Vec<String> {
    if k == 1 {
        vec![prefix.to_owned()]
    } else {
        (1..=k).map(|i| format!("{prefix}_{i}")).collect()
    }
}

/// `MIN:MAX:N` into `N` evenly spaced points (just `MIN` when `N = 1`).
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || {
        CliError::input(format!(
            "invalid grid {text:?}: expected MIN:MAX:N with N >= 1"
        ))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| lo + step * i as f64).collect())
}
