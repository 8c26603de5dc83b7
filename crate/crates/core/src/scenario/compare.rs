//! Column-by-column comparison of two CSV artifacts with the same schema.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnDelta {
    pub column: String,
    /// `false` when the column holds text, compared cell by cell.
    pub numeric: bool,
    pub max_abs: f64,
    /// Root-mean-square difference over the rows.
    pub l2: f64,
    /// Cells that differ in a text column.
    pub text_mismatches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub rows: usize,
    pub tolerance: f64,
    pub columns: Vec<ColumnDelta>,
    pub pass: bool,
}

fn read(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::SchemaMismatch(format!("{}: {other:?}", path.display())),
    })?;
    let bad = |e: csv::Error| Error::SchemaMismatch(format!("{}: {e}", path.display()));
    let header = r.headers().map_err(bad)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(bad)?.iter().map(str::to_owned).collect());
    }
    Ok((header, rows))
}

/// Compares two CSV files. Both must have identical headers and row counts.
pub fn compare_files(a: &Path, b: &Path, tolerance: f64) -> Result<CompareReport> {
    let (ha, ra) = read(a)?;
    let (hb, rb) = read(b)?;
    if ha != hb {
        return Err(Error::SchemaMismatch(format!("columns differ: {ha:?} vs {hb:?}")));
    }
    if ra.len() != rb.len() {
        return Err(Error::SchemaMismatch(format!("row counts differ: {} vs {}", ra.len(), rb.len())));
    }
    compare_rows(&ha, &ra, &rb, tolerance)
}

fn compare_rows(header: &[String], ra: &[Vec<String>], rb: &[Vec<String>], tolerance: f64) -> Result<CompareReport> {
    let mut columns = Vec::with_capacity(header.len());
    for (k, name) in header.iter().enumerate() {
        let cell = |rows: &[Vec<String>], i: usize| rows[i].get(k).cloned().unwrap_or_default();
        let parsed: Option<Vec<(f64, f64)>> = (0..ra.len())
            .map(|i| Some((cell(ra, i).trim().parse().ok()?, cell(rb, i).trim().parse().ok()?)))
            .collect();
        let delta = match parsed {
            Some(pairs) => {
                let (mut max_abs, mut sq) = (0.0f64, 0.0f64);
                for (x, y) in &pairs {
                    // Matching non-finite entries count as equal.
                    let d = if x == y || (x.is_nan() && y.is_nan()) {
                        0.0
                    } else if x.is_nan() || y.is_nan() {
                        f64::INFINITY
                    } else {
                        (x - y).abs()
                    };
                    max_abs = max_abs.max(d);
                    sq += d * d;
                }
                let l2 = if pairs.is_empty() { 0.0 } else { (sq / pairs.len() as f64).sqrt() };
                ColumnDelta { column: name.clone(), numeric: true, max_abs, l2, text_mismatches: 0 }
            }
            None => {
                let text_mismatches = (0..ra.len()).filter(|&i| cell(ra, i) != cell(rb, i)).count();
                ColumnDelta { column: name.clone(), numeric: false, max_abs: 0.0, l2: 0.0, text_mismatches }
            }
        };
        columns.push(delta);
    }
    let pass = columns.iter().all(|c| c.max_abs <= tolerance && c.text_mismatches == 0);
    Ok(CompareReport { rows: ra.len(), tolerance, columns, pass })
}
