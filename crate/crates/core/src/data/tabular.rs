use std::path::{Path, PathBuf};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    /// `[n, d_x]`
    pub x: Tensor,
    /// `[n, 1]`
    pub y: Tensor,
    pub feature_names: Vec<String>,
    pub target_name: String,
}

impl TabularDataset {
    pub fn new(x: Tensor, y: Tensor, feature_names: Vec<String>, target_name: String) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::shape("dataset", format!("{} feature rows vs {} target rows", x.rows(), y.rows())));
        }
        if feature_names.len() != x.cols() {
            return Err(Error::shape("dataset", format!("{} names for {} features", feature_names.len(), x.cols())));
        }
        Ok(Self { x, y, feature_names, target_name })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn d_x(&self) -> usize {
        self.x.cols()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(idx),
            y: self.y.select_rows(idx),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
        }
    }
}

/// Built-in dataset names mapped to `(file name, target column)`.
pub const KNOWN_DATASETS: &[(&str, &str, &str)] = &[
    ("boston", "boston.csv", "medv"),
    ("concrete", "concrete.csv", "compressive_strength"),
    ("yacht", "yacht.csv", "residuary_resistance"),
];

/// Path and target column for a built-in dataset name under `data_dir`.
pub fn known_dataset(name: &str, data_dir: &Path) -> Option<(PathBuf, String)> {
    KNOWN_DATASETS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, file, target)| (data_dir.join(file), target.to_string()))
}

/// Reads a headed CSV; `target_column` becomes `y` and every other column a
/// feature. Columns that are constant over the whole file are dropped.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str) -> Result<TabularDataset> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::DatasetMissing(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Format { path: path.to_path_buf(), msg: e.to_string() })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Format { path: path.to_path_buf(), msg: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let target = headers.iter().position(|h| h == target_column).ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        msg: format!("target column `{target_column}` not in header {headers:?}"),
    })?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let parse_err = |msg: String| Error::Parse { path: path.to_path_buf(), row, msg };
        let record = record.map_err(|e| parse_err(e.to_string()))?;
        if record.len() != headers.len() {
            return Err(parse_err(format!("{} cells, header has {}", record.len(), headers.len())));
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(c, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_err(format!("column `{}`: non-numeric cell `{cell}`", headers[c]))),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::Empty(format!("{} has no data rows", path.display())));
    }

    let mut keep = Vec::new();
    for c in (0..headers.len()).filter(|&c| c != target) {
        if rows.iter().all(|r| r[c] == rows[0][c]) {
            log::warn!("{}: dropping constant column `{}`", path.display(), headers[c]);
        } else {
            keep.push(c);
        }
    }
    if keep.is_empty() {
        return Err(Error::Empty(format!("{} has no non-constant feature columns", path.display())));
    }
    let n = rows.len();
    let x = rows.iter().flat_map(|r| keep.iter().map(move |&c| r[c])).collect();
    let y = rows.iter().map(|r| r[target]).collect();
    TabularDataset::new(
        Tensor::matrix(n, keep.len(), x)?,
        Tensor::column(y)?,
        keep.iter().map(|&c| headers[c].clone()).collect(),
        headers[target].clone(),
    )
}

/// A single named numeric column of a CSV, e.g. closing prices.
pub fn load_column(path: impl AsRef<Path>, column: &str) -> Result<Vec<f64>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::DatasetMissing(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Format { path: path.to_path_buf(), msg: e.to_string() })?;
    let idx = reader
        .headers()
        .map_err(|e| Error::Format { path: path.to_path_buf(), msg: e.to_string() })?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Format { path: path.to_path_buf(), msg: format!("no column `{column}`") })?;
    let mut out = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse { path: path.to_path_buf(), row: r + 1, msg: e.to_string() })?;
        let cell = record.get(idx).unwrap_or("");
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row: r + 1,
                    msg: format!("non-numeric cell `{cell}`"),
                })
            }
        }
    }
    Ok(out)
}
