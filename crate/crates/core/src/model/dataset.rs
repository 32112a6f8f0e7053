//! CSV datasets with an optional `<file>.schema.json` sidecar.
//!
//! ```json
//! {"columns": [{"name": "x1", "kind": "numeric"},
//!              {"name": "colour", "kind": "categorical", "states": ["red", "blue"]}],
//!  "target": "y"}
//! ```
//!
//! Without a sidecar a column is numeric when every cell parses as a finite
//! number and categorical otherwise (states sorted). The target defaults to
//! a column named `y` or `target`.

use std::io::Write;
use std::path::{Path, PathBuf};

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "states", rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub columns: Vec<Column>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

/// Rectangular table; categorical cells hold the state index.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    rows: Vec<Vec<f64>>,
    target: Option<usize>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, rows: Vec<Vec<f64>>, target: Option<&str>) -> Result<Self> {
        for (r, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::SchemaMismatch(format!(
                    "row {r} has {} cells for {} columns",
                    row.len(),
                    columns.len()
                )));
            }
            for (c, col) in columns.iter().enumerate() {
                let ok = match &col.kind {
                    ColumnKind::Numeric => row[c].is_finite(),
                    ColumnKind::Categorical(states) => {
                        row[c] >= 0.0 && row[c].fract() == 0.0 && (row[c] as usize) < states.len()
                    }
                };
                if !ok {
                    return Err(Error::Parse {
                        row: r + 1,
                        column: col.name.clone(),
                        message: format!("invalid cell {}", row[c]),
                    });
                }
            }
        }
        let target = match target {
            Some(name) => Some(
                columns
                    .iter()
                    .position(|c| c.name == name)
                    .ok_or_else(|| Error::SchemaMismatch(format!("target column `{name}` not found")))?,
            ),
            None => None,
        };
        Ok(Dataset { columns, rows, target })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn target(&self) -> Option<usize> {
        self.target
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::SchemaMismatch(format!("no column named `{name}`")))
    }

    /// Every column except the target.
    pub fn feature_names(&self) -> Vec<String> {
        (0..self.columns.len())
            .filter(|c| Some(*c) != self.target)
            .map(|c| self.columns[c].name.clone())
            .collect()
    }

    /// Rows restricted to the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Vec<Vec<f64>>> {
        let idx = names.iter().map(|n| self.column_index(n)).collect::<Result<Vec<_>>>()?;
        Ok(self.rows.iter().map(|r| idx.iter().map(|&c| r[c]).collect()).collect())
    }

    pub fn target_values(&self) -> Option<Vec<f64>> {
        let t = self.target?;
        Some(self.rows.iter().map(|r| r[t]).collect())
    }

    pub fn schema(&self) -> Schema {
        Schema {
            columns: self.columns.clone(),
            target: self.target.map(|t| self.columns[t].name.clone()),
        }
    }

    /// Write the data as CSV (categorical cells as labels) plus the schema
    /// sidecar next to it.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
        w.write_record(self.columns.iter().map(|c| c.name.as_str())).map_err(csv_io)?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&self.columns)
                .map(|(v, c)| match &c.kind {
                    ColumnKind::Numeric => format!("{v}"),
                    ColumnKind::Categorical(states) => states[*v as usize].clone(),
                })
                .collect();
            w.write_record(&cells).map_err(csv_io)?;
        }
        w.flush()?;
        let mut f = std::fs::File::create(schema_path(path))?;
        serde_json::to_writer_pretty(&mut f, &self.schema())?;
        writeln!(f)?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn schema_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".schema.json");
    PathBuf::from(name)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let sidecar = schema_path(path);
    let schema: Option<Schema> = if sidecar.exists() {
        Some(serde_json::from_str(&std::fs::read_to_string(&sidecar)?)?)
    } else {
        None
    };
    let data = parse_csv(&text, schema)?;
    info!(
        "loaded {} rows x {} columns from {}",
        data.n_rows(),
        data.columns.len(),
        path.display()
    );
    for (c, col) in data.columns.iter().enumerate() {
        match &col.kind {
            ColumnKind::Numeric => {
                let (lo, hi, sum) = data.rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), r| {
                    (lo.min(r[c]), hi.max(r[c]), s + r[c])
                });
                debug!(
                    "  {}: numeric min {lo} max {hi} mean {}",
                    col.name,
                    sum / data.n_rows().max(1) as f64
                );
            }
            ColumnKind::Categorical(states) => debug!("  {}: categorical {:?}", col.name, states),
        }
    }
    Ok(data)
}

/// Parse CSV text; `schema` (if any) must name the header columns in order.
pub fn parse_csv(text: &str, schema: Option<Schema>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| parse_error(0, "", e))?,
        None => {
            return Err(Error::Parse {
                row: 0,
                column: String::new(),
                message: "missing header row".into(),
            })
        }
    };
    let names: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    let mut cells: Vec<Vec<String>> = Vec::new();
    for (r, rec) in records.enumerate() {
        let rec = rec.map_err(|e| parse_error(r + 1, "", e))?;
        cells.push(rec.iter().map(|c| c.trim().to_string()).collect());
    }

    let (columns, target) = match schema {
        Some(schema) => {
            let declared: Vec<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
            if declared != names.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(Error::SchemaMismatch(format!(
                    "header {names:?} does not match schema columns {declared:?}"
                )));
            }
            (schema.columns, schema.target)
        }
        None => {
            let columns = names
                .iter()
                .enumerate()
                .map(|(c, name)| Column {
                    name: name.clone(),
                    kind: infer_kind(cells.iter().map(|row| row[c].as_str())),
                })
                .collect();
            let target = names.iter().find(|n| *n == "y" || *n == "target").cloned();
            (columns, target)
        }
    };

    let mut rows = Vec::with_capacity(cells.len());
    for (r, row) in cells.iter().enumerate() {
        let mut values = Vec::with_capacity(columns.len());
        for (cell, col) in row.iter().zip(&columns) {
            let bad = |message: String| Error::Parse {
                row: r + 1,
                column: col.name.clone(),
                message,
            };
            let v = match &col.kind {
                ColumnKind::Numeric => cell
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("`{cell}` is not a finite number")))?,
                ColumnKind::Categorical(states) => states
                    .iter()
                    .position(|s| s == cell)
                    .ok_or_else(|| bad(format!("`{cell}` is not a declared state")))? as f64,
            };
            values.push(v);
        }
        rows.push(values);
    }
    Dataset::new(columns, rows, target.as_deref())
}

fn parse_error(row: usize, column: &str, e: csv::Error) -> Error {
    Error::Parse {
        row,
        column: column.to_string(),
        message: e.to_string(),
    }
}

fn infer_kind<'a>(cells: impl Iterator<Item = &'a str> + Clone) -> ColumnKind {
    if cells.clone().all(|c| c.parse::<f64>().is_ok_and(f64::is_finite)) {
        ColumnKind::Numeric
    } else {
        let mut states: Vec<String> = cells.map(str::to_string).collect();
        states.sort();
        states.dedup();
        ColumnKind::Categorical(states)
    }
}
