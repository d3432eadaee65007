use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::implied_covariance;
use crate::error::{Error, Result};

/// Data-generating truth of a simulated dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    /// `m x H0` loadings.
    pub beta: DMatrix<f64>,
    /// Idiosyncratic variances (the diagonal of `Sigma0`).
    pub sigma2: DVector<f64>,
}

impl Truth {
    pub fn h0(&self) -> usize {
        self.beta.ncols()
    }

    pub fn omega(&self) -> DMatrix<f64> {
        implied_covariance(&self.beta, &self.sigma2)
    }
}

/// Observations `y_t` stored as the rows of an `n x m` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub y: DMatrix<f64>,
    pub truth: Option<Truth>,
}

impl Dataset {
    pub fn new(y: DMatrix<f64>) -> Self {
        Dataset { y, truth: None }
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn m(&self) -> usize {
        self.y.ncols()
    }

    /// Column-centered and unit-variance copy; the truth is dropped since it
    /// no longer describes the transformed data.
    pub fn standardized(&self) -> Dataset {
        let n = self.n();
        let mut y = self.y.clone();
        if n > 1 {
            for mut col in y.column_iter_mut() {
                let mean = col.mean();
                col.add_scalar_mut(-mean);
                let sd = (col.norm_squared() / (n - 1) as f64).sqrt();
                if sd > 0.0 {
                    col /= sd;
                }
            }
        }
        Dataset::new(y)
    }
}

#[derive(Serialize, Deserialize)]
struct TruthFile {
    h0: usize,
    /// Row-major `m x H0` loadings.
    beta0: Vec<Vec<f64>>,
    sigma0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

pub const DATA_FILE: &str = "y.csv";
pub const TRUTH_FILE: &str = "truth.json";

pub fn write_matrix_csv(path: &Path, mat: &DMatrix<f64>, header: Option<&[String]>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for row in mat.row_iter() {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a numeric CSV matrix; a non-numeric first row is taken as a header.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(Error::Parameter(format!(
                    "{}: row {} is not numeric: {e}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Dimension(format!("{}: ragged rows", path.display())));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), m, rows.into_iter().flatten()))
}

fn truth_path_for(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(TRUTH_FILE)
    } else {
        path.with_extension("truth.json")
    }
}

/// Write `y.csv` and (when present) `truth.json` into `dir`.
pub fn save_dataset(dir: &Path, data: &Dataset, meta: Option<serde_json::Value>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header: Vec<String> = (1..=data.m()).map(|i| format!("y{i}")).collect();
    write_matrix_csv(&dir.join(DATA_FILE), &data.y, Some(&header))?;
    if let Some(t) = &data.truth {
        let file = TruthFile {
            h0: t.h0(),
            beta0: t.beta.row_iter().map(|r| r.iter().copied().collect()).collect(),
            sigma0: t.sigma2.iter().copied().collect(),
            meta,
        };
        let path = dir.join(TRUTH_FILE);
        fs::write(&path, serde_json::to_string_pretty(&file)?).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

pub fn load_truth(path: &Path) -> Result<Truth> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: TruthFile = serde_json::from_str(&text)?;
    let m = file.sigma0.len();
    if file.beta0.len() != m || file.beta0.iter().any(|r| r.len() != file.h0) {
        return Err(Error::Dimension(format!(
            "{}: beta0 must be {m} x {}",
            path.display(),
            file.h0
        )));
    }
    Ok(Truth {
        beta: DMatrix::from_row_iterator(m, file.h0, file.beta0.into_iter().flatten()),
        sigma2: DVector::from_vec(file.sigma0),
    })
}

/// Load a dataset from a directory (`y.csv` + optional `truth.json`) or from a
/// CSV file (with an optional `<stem>.truth.json` sidecar).
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let data_path = if path.is_dir() { path.join(DATA_FILE) } else { path.to_path_buf() };
    if !data_path.exists() {
        return Err(Error::io(
            &data_path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset not found"),
        ));
    }
    let y = read_matrix_csv(&data_path)?;
    let truth_path = truth_path_for(path);
    let truth = if truth_path.exists() { Some(load_truth(&truth_path)?) } else { None };
    if let Some(t) = &truth {
        if t.sigma2.len() != y.ncols() {
            return Err(Error::Dimension("truth and data disagree on m".into()));
        }
    }
    Ok(Dataset { y, truth })
}
