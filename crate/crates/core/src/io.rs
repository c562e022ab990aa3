//! CSV ingestion and output. Rows are observations, columns are variables.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{stabilize, DataMatrix, DEFAULT_EPS};

#[derive(Debug, Clone, PartialEq)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// `None` detects a header: the first row is skipped when any of its
    /// cells is not a number.
    pub header: Option<bool>,
    /// Stabilization constant for all-zero columns; `None` disables it.
    pub stabilize: Option<f64>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: None,
            stabilize: Some(DEFAULT_EPS),
        }
    }
}

impl LoadOptions {
    /// No stabilization, for design and contrast matrices.
    pub fn raw() -> Self {
        Self {
            stabilize: None,
            ..Self::default()
        }
    }
}

fn parse_err(path: &Path, msg: String) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        msg,
    }
}

fn parse_cell(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}

/// Reads a numeric matrix from a delimited file.
pub fn read_matrix(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| parse_err(path, e.to_string()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(opts.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        let line = idx + 1;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if idx == 0 {
            let header = opts
                .header
                .unwrap_or_else(|| record.iter().any(|c| parse_cell(c).is_none()));
            if header {
                width = Some(record.len());
                continue;
            }
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(
                path,
                format!("line {line}: expected {w} fields, found {}", record.len()),
            ));
        }
        let mut row = Vec::with_capacity(w);
        for (col, cell) in record.iter().enumerate() {
            match parse_cell(cell) {
                Some(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(parse_err(
                        path,
                        format!("line {line}, column {}: `{cell}` is not a finite number", col + 1),
                    ))
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, "no numeric rows".into()));
    }
    let (n, p) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
}

/// Loads an observation matrix, stabilizing all-zero columns by default.
pub fn load_matrix(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<DataMatrix> {
    let x = DataMatrix::new(read_matrix(path, opts)?)?;
    match opts.stabilize {
        Some(eps) => stabilize(&x, eps),
        None => Ok(x),
    }
}

/// Writes a matrix as comma-separated values with shortest round-trip
/// formatting.
pub fn write_matrix(path: impl AsRef<Path>, x: &DMatrix<f64>) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    for i in 0..x.nrows() {
        let line: Vec<String> = x.row(i).iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}
