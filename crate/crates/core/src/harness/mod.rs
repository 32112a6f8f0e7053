//! Evaluation protocols for attribution methods: supervised clustering of
//! attribution vectors and masking-based model sensitivity, plus synthetic
//! data and CSV helpers.

mod clustering;
mod sensitivity;
pub mod synthetic;

use std::path::Path;

use crate::error::{Error, Result};

pub use clustering::{
    cluster_sweep, loss_clustering, r_squared, supervised_clustering, ClusteringResult, MAX_ITERATIONS,
    RELATIVE_TOLERANCE,
};
pub use sensitivity::{
    row_ranking, sensitivity_sweep, sensitivity_sweep_with, SensitivityCurve, SensitivityPoint, DEFAULT_RESAMPLES,
};

/// Numeric matrix with a header row.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        row: 0,
        column: String::new(),
        message: e.to_string(),
    })?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: r + 1,
            column: String::new(),
            message: e.to_string(),
        })?;
        let row = rec
            .iter()
            .zip(&header)
            .map(|(cell, col)| {
                cell.trim().parse::<f64>().map_err(|e| Error::Parse {
                    row: r + 1,
                    column: col.clone(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn write_matrix(path: impl AsRef<Path>, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| std::io::Error::other(e.to_string()))?;
    w.write_record(header).map_err(|e| std::io::Error::other(e.to_string()))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v}")))
            .map_err(|e| std::io::Error::other(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
