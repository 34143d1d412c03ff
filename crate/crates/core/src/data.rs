//! Datasets, CSV ingestion, standardization, splitting and the synthetic
//! data generating processes used by the simulation studies.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Result, SvmmaError};
use crate::rng::{rng_from_seed, StreamRng};

/// An `n x p` feature matrix with `±1` labels. The intercept column is
/// implicit and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Vec<f64>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        features: DMatrix<f64>,
        labels: Vec<f64>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let (n, p) = features.shape();
        if n == 0 || p == 0 {
            return Err(SvmmaError::InvalidData(format!(
                "dataset must have at least one row and one column (got {n}x{p})"
            )));
        }
        if labels.len() != n {
            return Err(SvmmaError::mismatch("label count", n, labels.len()));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(SvmmaError::InvalidData(format!("label {bad} is not ±1")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(SvmmaError::InvalidData("non-finite feature value".into()));
        }
        if let Some(names) = &feature_names {
            if names.len() != p {
                return Err(SvmmaError::mismatch("feature name count", p, names.len()));
            }
        }
        Ok(Dataset {
            features,
            labels,
            feature_names,
        })
    }

    /// Builds a dataset from row-major feature rows.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != p) {
            return Err(SvmmaError::mismatch("row length", p, r.len()));
        }
        let features = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
        Dataset::new(features, labels, None)
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Feature values of row `i`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.features.row(i).iter().copied().collect()
    }

    /// Rows at `indices`, in the given order. Indices may repeat.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let p = self.n_features();
        let features = DMatrix::from_fn(indices.len(), p, |i, j| self.features[(indices[i], j)]);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset {
            features,
            labels,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Columns at `columns`, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Dataset> {
        let p = self.n_features();
        if let Some(&bad) = columns.iter().find(|&&c| c >= p) {
            return Err(SvmmaError::invalid(format!(
                "column index {bad} out of range for {p} features"
            )));
        }
        if columns.is_empty() {
            return Err(SvmmaError::invalid("empty column selection"));
        }
        let features = self.features.select_columns(columns);
        let feature_names = self
            .feature_names
            .as_ref()
            .map(|names| columns.iter().map(|&c| names[c].clone()).collect());
        Ok(Dataset {
            features,
            labels: self.labels.clone(),
            feature_names,
        })
    }

    /// Stacks `other` below `self`.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.n_features() != other.n_features() {
            return Err(SvmmaError::mismatch(
                "feature count",
                self.n_features(),
                other.n_features(),
            ));
        }
        let (n1, n2, p) = (self.n_samples(), other.n_samples(), self.n_features());
        let features = DMatrix::from_fn(n1 + n2, p, |i, j| {
            if i < n1 {
                self.features[(i, j)]
            } else {
                other.features[(i - n1, j)]
            }
        });
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Dataset {
            features,
            labels,
            feature_names: self.feature_names.clone(),
        })
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

/// Reads a comma-separated file. The first record is treated as a header
/// when a label column is selected by name, or when any of its feature cells
/// is not a number. The lexicographically larger label becomes `+1`.
pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let csv_err = |message: String| SvmmaError::Csv {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(e.to_string()))?;
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let first = records.first().ok_or_else(|| csv_err("empty file".into()))?;
    let width = first.len();

    let label_idx = match label {
        LabelColumn::Index(i) => *i,
        LabelColumn::Name(name) => first
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| csv_err(format!("no column named {name:?}")))?,
    };
    if label_idx >= width {
        return Err(csv_err(format!(
            "label column {label_idx} out of range for {width} columns"
        )));
    }
    let has_header = matches!(label, LabelColumn::Name(_))
        || first
            .iter()
            .enumerate()
            .any(|(j, cell)| j != label_idx && cell.parse::<f64>().is_err());
    let header = has_header.then(|| first.clone());
    let body = &records[usize::from(has_header)..];
    if body.is_empty() {
        return Err(csv_err("empty file".into()));
    }

    let p = width - 1;
    let mut values = Vec::with_capacity(body.len() * p);
    let mut raw_labels = Vec::with_capacity(body.len());
    for (r, rec) in body.iter().enumerate() {
        if rec.len() != width {
            return Err(csv_err(format!(
                "row {} has {} fields, expected {width}",
                r + 1,
                rec.len()
            )));
        }
        for (j, cell) in rec.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(cell.clone());
            } else {
                let v = cell.parse::<f64>().map_err(|_| {
                    csv_err(format!("non-numeric feature cell {cell:?} in row {}", r + 1))
                })?;
                values.push(v);
            }
        }
    }

    let distinct: BTreeSet<&str> = raw_labels.iter().map(String::as_str).collect();
    if distinct.len() != 2 {
        return Err(SvmmaError::LabelsNotBinary(distinct.len()));
    }
    let positive = *distinct.iter().next_back().expect("two labels");
    let labels = raw_labels
        .iter()
        .map(|l| if l == positive { 1.0 } else { -1.0 })
        .collect();
    let features = DMatrix::from_row_slice(body.len(), p, &values);
    let names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, name)| name)
            .collect()
    });
    Dataset::new(features, labels, names)
}

/// Per-column centering and scaling learned from a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    /// Population standard deviations; zero marks a constant column.
    pub scales: Vec<f64>,
}

/// Centers every column and scales non-constant columns to unit population
/// standard deviation.
pub fn standardize(train: &Dataset) -> (Dataset, StandardizationParams) {
    let n = train.n_samples() as f64;
    let mut means = Vec::with_capacity(train.n_features());
    let mut scales = Vec::with_capacity(train.n_features());
    for col in train.features.column_iter() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        // treat round-off variance of a constant column as zero
        let scale = if var.sqrt() <= 1e-12 * mean.abs().max(1.0) {
            0.0
        } else {
            var.sqrt()
        };
        means.push(mean);
        scales.push(scale);
    }
    let params = StandardizationParams { means, scales };
    let out = transform(train, &params);
    (out, params)
}

pub fn apply_standardization(data: &Dataset, params: &StandardizationParams) -> Result<Dataset> {
    let p = data.n_features();
    if params.means.len() != p || params.scales.len() != p {
        return Err(SvmmaError::mismatch(
            "standardization parameter length",
            p,
            params.means.len(),
        ));
    }
    Ok(transform(data, params))
}

fn transform(data: &Dataset, params: &StandardizationParams) -> Dataset {
    let mut features = data.features.clone();
    for (j, mut col) in features.column_iter_mut().enumerate() {
        let (m, s) = (params.means[j], params.scales[j]);
        for v in col.iter_mut() {
            *v -= m;
            if s > 0.0 {
                *v /= s;
            }
        }
    }
    Dataset {
        features,
        labels: data.labels.clone(),
        feature_names: data.feature_names.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn train_size(&self, n: usize) -> usize {
        (self.train_fraction * n as f64).floor() as usize
    }
}

/// Random train/test split with exactly `floor(g * N)` training rows.
/// Both parts keep the shuffled row order.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let n = data.n_samples();
    let g = spec.train_fraction;
    if !(g > 0.0 && g < 1.0) {
        return Err(SvmmaError::invalid(format!(
            "train fraction {g} must lie in (0, 1)"
        )));
    }
    let n_train = spec.train_size(n);
    if n_train < 1 || n - n_train < 1 {
        return Err(SvmmaError::invalid(format!(
            "split of {n} rows at fraction {g} leaves an empty part"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from_seed(spec.seed));
    Ok((
        data.select_rows(&idx[..n_train]),
        data.select_rows(&idx[n_train..]),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dgp {
    /// Two Gaussian classes with means `±mu`, compound-symmetric covariance.
    Dgp1,
    /// Probit labels over AR(1)-correlated Gaussian covariates.
    Dgp2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub which: Dgp,
    pub n: usize,
    pub p: usize,
    /// Number of signal covariates; they occupy the first `q` columns.
    pub q: usize,
    pub seed: u64,
}

impl DgpConfig {
    pub fn dgp1(n: usize, p: usize, q: usize, seed: u64) -> Self {
        DgpConfig {
            which: Dgp::Dgp1,
            n,
            p,
            q,
            seed,
        }
    }

    pub fn dgp2(n: usize, p: usize, q: usize, seed: u64) -> Self {
        DgpConfig {
            which: Dgp::Dgp2,
            ..Self::dgp1(n, p, q, seed)
        }
    }

    fn validate(&self, expected: Dgp) -> Result<()> {
        if self.which != expected {
            return Err(SvmmaError::invalid(format!(
                "generator for {expected:?} called with {:?} config",
                self.which
            )));
        }
        if self.n == 0 || self.p == 0 {
            return Err(SvmmaError::invalid("n and p must be positive"));
        }
        if self.q == 0 || self.q > self.p {
            return Err(SvmmaError::invalid(format!(
                "sparsity q={} must satisfy 1 <= q <= p={}",
                self.q, self.p
            )));
        }
        Ok(())
    }
}

pub const DGP1_MEAN: f64 = 0.6;
pub const DGP1_CORRELATION: f64 = 0.2;
pub const DGP2_COEFFICIENT: f64 = 2.0;
pub const DGP2_AR: f64 = 0.4;

/// Draws from either generator.
pub fn generate(cfg: &DgpConfig) -> Result<Dataset> {
    match cfg.which {
        Dgp::Dgp1 => gen_dgp1(cfg),
        Dgp::Dgp2 => gen_dgp2(cfg),
    }
}

pub fn dgp1_covariance(p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { DGP1_CORRELATION })
}

pub fn dgp2_covariance(p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| DGP2_AR.powi(i.abs_diff(j) as i32))
}

fn cholesky_factor(sigma: DMatrix<f64>) -> DMatrix<f64> {
    sigma
        .cholesky()
        .expect("compound-symmetric and AR(1) covariances are positive definite")
        .unpack()
}

fn standard_normals(rng: &mut StreamRng, p: usize) -> DVector<f64> {
    DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// One DGP1 covariate vector for `label`, given standard normal draws `z`.
fn dgp1_row(label: f64, z: &DVector<f64>, mu: &DVector<f64>, chol: &DMatrix<f64>) -> DVector<f64> {
    mu * label + chol * z
}

pub fn gen_dgp1(cfg: &DgpConfig) -> Result<Dataset> {
    cfg.validate(Dgp::Dgp1)?;
    let (n, p, q) = (cfg.n, cfg.p, cfg.q);
    let chol = cholesky_factor(dgp1_covariance(p));
    let mu = DVector::from_fn(p, |j, _| if j < q { DGP1_MEAN } else { 0.0 });
    let mut rng = rng_from_seed(cfg.seed);
    let mut features = DMatrix::zeros(n, p);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let z = standard_normals(&mut rng, p);
        features.row_mut(i).tr_copy_from(&dgp1_row(y, &z, &mu, &chol));
        labels.push(y);
    }
    Dataset::new(features, labels, None)
}

/// Standard normal CDF.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / std::f64::consts::SQRT_2)
}

pub fn gen_dgp2(cfg: &DgpConfig) -> Result<Dataset> {
    cfg.validate(Dgp::Dgp2)?;
    let (n, p, q) = (cfg.n, cfg.p, cfg.q);
    let chol = cholesky_factor(dgp2_covariance(p));
    let mut rng = rng_from_seed(cfg.seed);
    let mut features = DMatrix::zeros(n, p);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let x = &chol * standard_normals(&mut rng, p);
        let index: f64 = x.iter().take(q).sum::<f64>() * DGP2_COEFFICIENT;
        let y = if rng.random::<f64>() < normal_cdf(index) {
            1.0
        } else {
            -1.0
        };
        features.row_mut(i).tr_copy_from(&x);
        labels.push(y);
    }
    Dataset::new(features, labels, None)
}
