//! Dataset ingestion, 0-1 normalization, splitting, heterogeneous feature
//! partitioning, and the synthetic demonstration generator.

use crate::numkit::Matrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {message}")]
    Csv { path: String, message: String },
    #[error("row {line} has {got} fields, expected {expected}")]
    RaggedRow {
        line: u64,
        expected: usize,
        got: usize,
    },
    #[error("cannot parse field at row {line}, column {column}: {value:?}")]
    BadField {
        line: u64,
        column: usize,
        value: String,
    },
    #[error("target column {0:?} not found")]
    TargetNotFound(String),
    #[error("target column index {index} out of range 1..={cols}")]
    TargetOutOfRange { index: usize, cols: usize },
    #[error("dataset is empty")]
    Empty,
    #[error("invalid feature group spec: {0}")]
    BadGroupSpec(String),
    #[error("invalid split spec: {0}")]
    BadSplitSpec(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, DataError>;

/// A regression dataset: N×d inputs, an N-vector target, and column names.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub column_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>, column_names: Vec<String>) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(DataError::Empty);
        }
        if x.rows() != y.len() || column_names.len() != x.cols() {
            return Err(DataError::Parameter(format!(
                "inconsistent dataset: X is {}x{}, y has {} rows, {} names",
                x.rows(),
                x.cols(),
                y.len(),
                column_names.len()
            )));
        }
        Ok(Self { x, y, column_names })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    /// New dataset containing the given rows, in order.
    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        let mut data = Vec::with_capacity(rows.len() * self.dim());
        let mut y = Vec::with_capacity(rows.len());
        for &r in rows {
            data.extend_from_slice(self.x.row(r));
            y.push(self.y[r]);
        }
        Dataset {
            x: Matrix::from_raw(rows.len(), self.dim(), data),
            y,
            column_names: self.column_names.clone(),
        }
    }

    /// Concatenates two datasets with identical schemas row-wise.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.dim() != other.dim() {
            return Err(DataError::Parameter("concat: column counts differ".into()));
        }
        let mut data = Vec::with_capacity((self.n() + other.n()) * self.dim());
        data.extend_from_slice(self.x.data());
        data.extend_from_slice(other.x.data());
        let mut y = self.y.clone();
        y.extend_from_slice(&other.y);
        Ok(Dataset {
            x: Matrix::from_raw(self.n() + other.n(), self.dim(), data),
            y,
            column_names: self.column_names.clone(),
        })
    }
}

/// Partition of the columns 1..=d into M disjoint groups (1-based indices, as
/// written in group-spec files).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FeatureGroupSpec {
    pub groups: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl FeatureGroupSpec {
    pub fn new(groups: Vec<Vec<usize>>) -> Self {
        Self {
            groups,
            names: None,
        }
    }

    /// Contiguous 1-based ranges `[lo, hi]`, the shape used by the dataset
    /// tables.
    pub fn from_ranges(ranges: &[(usize, usize)]) -> Self {
        Self::new(ranges.iter().map(|&(lo, hi)| (lo..=hi).collect()).collect())
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn total_width(&self) -> usize {
        self.groups.iter().map(|g| g.len()).sum()
    }

    /// Checks the partition invariants against a dataset width `d`: groups
    /// nonempty, indices in 1..=d, pairwise disjoint, union exactly 1..=d.
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.groups.is_empty() {
            return Err(DataError::BadGroupSpec("no groups".into()));
        }
        if let Some(names) = &self.names {
            if names.len() != self.groups.len() {
                return Err(DataError::BadGroupSpec(format!(
                    "{} names for {} groups",
                    names.len(),
                    self.groups.len()
                )));
            }
        }
        let mut seen = vec![false; d];
        for (gi, group) in self.groups.iter().enumerate() {
            if group.is_empty() {
                return Err(DataError::BadGroupSpec(format!(
                    "group {} is empty",
                    gi + 1
                )));
            }
            for &c in group {
                if c == 0 || c > d {
                    return Err(DataError::BadGroupSpec(format!(
                        "column {c} in group {} out of range 1..={d}",
                        gi + 1
                    )));
                }
                if seen[c - 1] {
                    return Err(DataError::BadGroupSpec(format!(
                        "column {c} appears in more than one group"
                    )));
                }
                seen[c - 1] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(DataError::BadGroupSpec(format!(
                "column {} is not covered by any group",
                missing + 1
            )));
        }
        Ok(())
    }

    /// 0-based column indices of group `m`.
    pub fn columns0(&self, m: usize) -> Vec<usize> {
        self.groups[m].iter().map(|&c| c - 1).collect()
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| DataError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| DataError::BadGroupSpec(e.to_string()))
    }
}

/// Per-column min/max fitted on a training split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormParams {
    pub fn fit(train: &Dataset) -> Self {
        let d = train.dim();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for i in 0..train.n() {
            for (j, &v) in train.x.row(i).iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Self { min, max }
    }

    /// Applies `(x - min) / (max - min)` columnwise; constant columns map to
    /// zero. Held-out values outside the fitted range are not clipped.
    pub fn apply(&self, data: &Dataset) -> Dataset {
        let d = data.dim();
        assert_eq!(d, self.min.len());
        let span: Vec<f64> = self
            .min
            .iter()
            .zip(&self.max)
            .map(|(lo, hi)| hi - lo)
            .collect();
        let mut out = Vec::with_capacity(data.n() * d);
        for i in 0..data.n() {
            for (j, &v) in data.x.row(i).iter().enumerate() {
                out.push(if span[j] == 0.0 {
                    0.0
                } else {
                    (v - self.min[j]) / span[j]
                });
            }
        }
        Dataset {
            x: Matrix::from_raw(data.n(), d, out),
            y: data.y.clone(),
            column_names: data.column_names.clone(),
        }
    }

    /// [`NormParams::apply`] over a bare matrix.
    pub fn apply_matrix(&self, x: &Matrix) -> Matrix {
        let d = x.cols();
        assert_eq!(d, self.min.len());
        let span: Vec<f64> = self
            .min
            .iter()
            .zip(&self.max)
            .map(|(lo, hi)| hi - lo)
            .collect();
        let mut out = Vec::with_capacity(x.rows() * d);
        for i in 0..x.rows() {
            for (j, &v) in x.row(i).iter().enumerate() {
                out.push(if span[j] == 0.0 {
                    0.0
                } else {
                    (v - self.min[j]) / span[j]
                });
            }
        }
        Matrix::from_raw(x.rows(), d, out)
    }

    /// Inverse transform of [`NormParams::apply`] (constant columns map back
    /// to their fitted minimum).
    pub fn invert(&self, data: &Dataset) -> Dataset {
        let d = data.dim();
        let mut out = Vec::with_capacity(data.n() * d);
        for i in 0..data.n() {
            for (j, &v) in data.x.row(i).iter().enumerate() {
                out.push(self.min[j] + v * (self.max[j] - self.min[j]));
            }
        }
        Dataset {
            x: Matrix::from_raw(data.n(), d, out),
            y: data.y.clone(),
            column_names: data.column_names.clone(),
        }
    }
}

/// Min/max scaling for the scalar target, kept separate so the ensemble
/// pipeline can leave `y` untouched unless asked.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TargetNorm {
    pub min: f64,
    pub max: f64,
}

impl TargetNorm {
    pub fn fit(y: &[f64]) -> Self {
        let min = y.iter().copied().fold(f64::INFINITY, f64::min);
        let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { min, max }
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let span = self.max - self.min;
        y.iter()
            .map(|&v| {
                if span == 0.0 {
                    0.0
                } else {
                    (v - self.min) / span
                }
            })
            .collect()
    }

    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .map(|&v| self.min + v * (self.max - self.min))
            .collect()
    }
}

/// Fits normalization on `train` only and applies it to `train` and every
/// dataset in `others`.
pub fn minmax_fit_apply(
    train: &Dataset,
    others: &[&Dataset],
) -> (Dataset, Vec<Dataset>, NormParams) {
    let params = NormParams::fit(train);
    let train_n = params.apply(train);
    let others_n = others.iter().map(|d| params.apply(d)).collect();
    (train_n, others_n, params)
}

/// Train/validation/test fractions plus the shuffle seed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_frac: f64, val_frac: f64, test_frac: f64, seed: u64) -> Self {
        Self {
            train_frac,
            val_frac,
            test_frac,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_frac, self.val_frac, self.test_frac];
        if fracs.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
            return Err(DataError::BadSplitSpec("fractions must be positive".into()));
        }
        let sum: f64 = fracs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(DataError::BadSplitSpec(format!(
                "fractions sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

/// Seeded uniform shuffle followed by contiguous slicing. Validation and test
/// sizes are floor-rounded; the remainder goes to the training split.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    spec.validate()?;
    let n = data.n();
    if n < 3 {
        return Err(DataError::Parameter(format!(
            "split needs at least 3 rows, got {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    let n_val = (spec.val_frac * n as f64).floor() as usize;
    let n_test = (spec.test_frac * n as f64).floor() as usize;
    let n_train = n - n_val - n_test;
    let train = data.take_rows(&idx[..n_train]);
    let val = data.take_rows(&idx[n_train..n_train + n_val]);
    let test = data.take_rows(&idx[n_train + n_val..]);
    Ok((train, val, test))
}

/// Splits the columns of `data` into one dataset per feature group. Every
/// group dataset keeps all rows and shares the target.
pub fn partition_features(data: &Dataset, spec: &FeatureGroupSpec) -> Result<Vec<Dataset>> {
    spec.validate(data.dim())?;
    let mut out = Vec::with_capacity(spec.group_count());
    for m in 0..spec.group_count() {
        let cols = spec.columns0(m);
        let mut values = Vec::with_capacity(data.n() * cols.len());
        for i in 0..data.n() {
            let row = data.x.row(i);
            for &c in &cols {
                values.push(row[c]);
            }
        }
        let names = cols.iter().map(|&c| data.column_names[c].clone()).collect();
        out.push(Dataset {
            x: Matrix::from_raw(data.n(), cols.len(), values),
            y: data.y.clone(),
            column_names: names,
        });
    }
    Ok(out)
}

/// Which column holds the regression target.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetColumn {
    /// 1-based position in the file.
    Index(usize),
    Name(String),
}

/// Loads a delimited numeric file. When `has_header` is `None` the header is
/// auto-detected: a first row with any non-numeric field is taken as a header.
pub fn load_csv(
    path: &Path,
    target: &TargetColumn,
    has_header: Option<bool>,
    delimiter: u8,
) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(file);

    let mut records: Vec<(u64, csv::StringRecord)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| DataError::Csv {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(DataError::Empty);
    }

    let first = &records[0].1;
    let cols = first.len();
    let first_is_numeric = first.iter().all(|f| f.trim().parse::<f64>().is_ok());
    let header_present = has_header.unwrap_or(!first_is_numeric);

    let names: Vec<String> = if header_present {
        first.iter().map(|s| s.trim().to_string()).collect()
    } else {
        (1..=cols).map(|i| format!("x{i}")).collect()
    };
    let data_records = if header_present {
        &records[1..]
    } else {
        &records[..]
    };
    if data_records.is_empty() {
        return Err(DataError::Empty);
    }

    let target_idx = match target {
        TargetColumn::Index(i) => {
            if *i == 0 || *i > cols {
                return Err(DataError::TargetOutOfRange { index: *i, cols });
            }
            *i - 1
        }
        TargetColumn::Name(name) => names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DataError::TargetNotFound(name.clone()))?,
    };

    let d = cols - 1;
    if d == 0 {
        return Err(DataError::Parameter(
            "file has no feature columns besides the target".into(),
        ));
    }
    let mut x = Vec::with_capacity(data_records.len() * d);
    let mut y = Vec::with_capacity(data_records.len());
    for (line, rec) in data_records {
        if rec.len() != cols {
            return Err(DataError::RaggedRow {
                line: *line,
                expected: cols,
                got: rec.len(),
            });
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| DataError::BadField {
                line: *line,
                column: j + 1,
                value: field.to_string(),
            })?;
            if j == target_idx {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    let feature_names: Vec<String> = names
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != target_idx)
        .map(|(_, n)| n.clone())
        .collect();
    Dataset::new(Matrix::from_raw(y.len(), d, x), y, feature_names)
}

/// Loads a delimited numeric file with no designated target column, as used
/// for prediction inputs. An empty file yields a 0-row matrix.
pub fn load_matrix_csv(
    path: &Path,
    has_header: Option<bool>,
    delimiter: u8,
) -> Result<(Matrix, Vec<String>)> {
    let file = std::fs::File::open(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(file);
    let mut records: Vec<(u64, csv::StringRecord)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| DataError::Csv {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    if records.is_empty() {
        return Ok((Matrix::zeros(0, 0), Vec::new()));
    }
    let first = &records[0].1;
    let cols = first.len();
    let first_is_numeric = first.iter().all(|f| f.trim().parse::<f64>().is_ok());
    let header_present = has_header.unwrap_or(!first_is_numeric);
    let names: Vec<String> = if header_present {
        first.iter().map(|s| s.trim().to_string()).collect()
    } else {
        (1..=cols).map(|i| format!("x{i}")).collect()
    };
    let data_records = if header_present {
        &records[1..]
    } else {
        &records[..]
    };
    let mut x = Vec::with_capacity(data_records.len() * cols);
    for (line, rec) in data_records {
        if rec.len() != cols {
            return Err(DataError::RaggedRow {
                line: *line,
                expected: cols,
                got: rec.len(),
            });
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| DataError::BadField {
                line: *line,
                column: j + 1,
                value: field.to_string(),
            })?;
            x.push(v);
        }
    }
    Ok((Matrix::from_raw(x.len() / cols, cols, x), names))
}

/// Samples the 2-D demonstration curve: `x1 ~ U[lo, hi]`, `x2 = sin(x1)`,
/// `y = cos(2·x2) / exp(x1)`.
pub fn synth_generate(n: usize, x1_low: f64, x1_high: f64, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(DataError::Parameter(
            "synth_generate: n must be >= 1".into(),
        ));
    }
    if !(x1_low < x1_high) {
        return Err(DataError::Parameter(
            "synth_generate: need x1_low < x1_high".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n * 2);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = x1_low + (x1_high - x1_low) * rng.random::<f64>();
        let x2 = x1.sin();
        x.push(x1);
        x.push(x2);
        y.push((2.0 * x2).cos() / x1.exp());
    }
    Dataset::new(Matrix::from_raw(n, 2, x), y, vec!["x1".into(), "x2".into()])
}
