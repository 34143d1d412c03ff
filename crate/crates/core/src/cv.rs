//! J-fold cross-validation weights over the candidate simplex, full-data
//! refits, and prediction with the averaged estimator.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{average_coefficients, embed, restrict, CandidateSet};
use crate::data::Dataset;
use crate::error::{Result, SvmmaError};
use crate::lp::{LinearProgram, Relation, SimplexOptions};
use crate::rng::rng_from_seed;
use crate::svm::{hinge, train_l2_svm, Coefficients, FitReport, L2SolverConfig};

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub const SUM_TOLERANCE: f64 = 1e-10;

    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(SvmmaError::invalid("weight vector is empty"));
        }
        if w.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(SvmmaError::invalid("weights must lie in [0, 1]"));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(SvmmaError::invalid(format!("weights sum to {sum}, not 1")));
        }
        Ok(WeightVector(w))
    }

    /// Clips negatives and renormalizes. For solver output that sits on the
    /// simplex up to round-off.
    pub fn from_nearly_feasible(raw: &[f64]) -> Result<Self> {
        let clipped: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
        let sum: f64 = clipped.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(SvmmaError::invalid("weights have no positive mass"));
        }
        let w: Vec<f64> = clipped.iter().map(|v| (v / sum).min(1.0)).collect();
        WeightVector::new(w)
    }

    pub fn unit(len: usize, k: usize) -> Self {
        let mut w = vec![0.0; len];
        w[k] = 1.0;
        WeightVector(w)
    }

    pub fn uniform(len: usize) -> Self {
        WeightVector(vec![1.0 / len as f64; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest weight (first on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = k;
            }
        }
        best
    }
}

/// Assignment of training rows to folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    folds: usize,
    block: usize,
    fold_of: Vec<usize>,
}

impl FoldPlan {
    pub fn n_folds(&self) -> usize {
        self.folds
    }

    /// `floor(n / J)`.
    pub fn block_size(&self) -> usize {
        self.block
    }

    /// Zero-based fold of every row.
    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn rows_in(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == fold)
            .collect()
    }

    pub fn rows_outside(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] != fold)
            .collect()
    }
}

/// Contiguous folds of `floor(n/J)` rows; the `n mod J` leftover rows go one
/// each to the first folds. With `shuffle`, rows are permuted by the seed
/// before the blocks are cut.
pub fn make_folds(n: usize, folds: usize, shuffle: Option<u64>) -> Result<FoldPlan> {
    if folds < 2 || folds > n {
        return Err(SvmmaError::invalid(format!(
            "fold count {folds} must lie in 2..={n}"
        )));
    }
    let block = n / folds;
    let extra = n % folds;
    let mut fold_of = Vec::with_capacity(n);
    for j in 0..folds {
        let size = block + usize::from(j < extra);
        fold_of.extend(std::iter::repeat_n(j, size));
    }
    if let Some(seed) = shuffle {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng_from_seed(seed));
        let contiguous = fold_of.clone();
        for (pos, &row) in perm.iter().enumerate() {
            fold_of[row] = contiguous[pos];
        }
    }
    Ok(FoldPlan {
        folds,
        block,
        fold_of,
    })
}

/// Fold-complement fits: `coefficients[j][s]` is candidate `s` trained
/// without fold `j`, in the submodel's own dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldFits {
    pub coefficients: Vec<Vec<Coefficients>>,
    pub reports: Vec<Vec<FitReport>>,
}

impl FoldFits {
    pub fn all_converged(&self) -> bool {
        self.reports.iter().flatten().all(|r| r.converged)
    }
}

/// Regularization used when fitting on `m` rows: `1/m`.
pub fn penalty_for(m: usize) -> f64 {
    1.0 / m as f64
}

pub fn fit_fold_models(
    train: &Dataset,
    cands: &CandidateSet,
    plan: &FoldPlan,
    tolerance: f64,
) -> Result<FoldFits> {
    if plan.fold_of.len() != train.n_samples() {
        return Err(SvmmaError::mismatch(
            "fold plan length",
            train.n_samples(),
            plan.fold_of.len(),
        ));
    }
    let subsets: Vec<Dataset> = (0..plan.folds)
        .map(|j| train.select_rows(&plan.rows_outside(j)))
        .collect();
    let cells: Vec<(usize, usize)> = (0..plan.folds)
        .flat_map(|j| (0..cands.len()).map(move |s| (j, s)))
        .collect();
    let fits: Vec<(Coefficients, FitReport)> = cells
        .par_iter()
        .map(|&(j, s)| {
            let sub = restrict(&subsets[j], &cands.models()[s])?;
            let cfg = L2SolverConfig {
                lambda: penalty_for(sub.n_samples()),
                tolerance,
                ..Default::default()
            };
            train_l2_svm(&sub, &cfg)
        })
        .collect::<Result<_>>()?;
    let mut coefficients = vec![Vec::with_capacity(cands.len()); plan.folds];
    let mut reports = vec![Vec::with_capacity(cands.len()); plan.folds];
    for ((j, _), (beta, report)) in cells.into_iter().zip(fits) {
        coefficients[j].push(beta);
        reports[j].push(report);
    }
    Ok(FoldFits {
        coefficients,
        reports,
    })
}

/// `Z[i][s] = y_i * (margin of candidate s at row i)`; the hinge criterion
/// of a weight vector `w` is `(1/n) sum_i hinge(Z_i . w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CvMarginMatrix {
    z: DMatrix<f64>,
}

impl CvMarginMatrix {
    pub fn new(z: DMatrix<f64>) -> Result<Self> {
        if z.nrows() == 0 || z.ncols() == 0 {
            return Err(SvmmaError::invalid("margin matrix is empty"));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(SvmmaError::invalid("margin matrix has non-finite entries"));
        }
        Ok(CvMarginMatrix { z })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn n_rows(&self) -> usize {
        self.z.nrows()
    }

    pub fn n_models(&self) -> usize {
        self.z.ncols()
    }

    /// `(1/n) sum_i hinge(Z_i . w)`.
    pub fn objective(&self, w: &[f64]) -> f64 {
        assert_eq!(w.len(), self.n_models(), "weight length");
        let n = self.n_rows();
        let mut total = 0.0;
        for i in 0..n {
            let margin: f64 = (0..w.len()).map(|s| self.z[(i, s)] * w[s]).sum();
            total += hinge(margin);
        }
        total / n as f64
    }
}

/// Margins of full-length coefficient vectors on `data`.
pub fn margin_matrix(data: &Dataset, embedded: &[Coefficients]) -> Result<CvMarginMatrix> {
    let n = data.n_samples();
    let mut z = DMatrix::zeros(n, embedded.len());
    for (s, beta) in embedded.iter().enumerate() {
        let f = beta.decision_values(data)?;
        for i in 0..n {
            z[(i, s)] = data.labels()[i] * f[i];
        }
    }
    CvMarginMatrix::new(z)
}

pub fn build_cv_matrix(
    train: &Dataset,
    cands: &CandidateSet,
    plan: &FoldPlan,
    fits: &FoldFits,
) -> Result<CvMarginMatrix> {
    let n = train.n_samples();
    if plan.fold_of.len() != n {
        return Err(SvmmaError::mismatch("fold plan length", n, plan.fold_of.len()));
    }
    if fits.coefficients.len() != plan.folds
        || fits.coefficients.iter().any(|row| row.len() != cands.len())
    {
        return Err(SvmmaError::invalid("fold fits do not match the plan and candidates"));
    }
    let mut z = DMatrix::zeros(n, cands.len());
    for (s, spec) in cands.models().iter().enumerate() {
        let sub = restrict(train, spec)?;
        for i in 0..n {
            let beta = &fits.coefficients[plan.fold_of[i]][s];
            if beta.dim() != spec.size() {
                return Err(SvmmaError::mismatch("fold fit length", spec.size(), beta.dim()));
            }
            let row = sub.features().row(i);
            let f = beta.intercept + row.iter().zip(&beta.weights).map(|(x, w)| x * w).sum::<f64>();
            z[(i, s)] = train.labels()[i] * f;
        }
    }
    CvMarginMatrix::new(z)
}

/// Minimizes `(1/n) sum_i hinge(Z_i . w)` over the simplex.
///
/// Solved exactly through the dual linear program
///
/// ```text
/// max sum_i a_i + t  s.t.  sum_i Z_is a_i + t <= 0 for every s,
///                          0 <= a_i <= 1/n,  t free
/// ```
///
/// whose row multipliers are the optimal weights. Returns the weights and
/// the criterion evaluated at them.
pub fn solve_weights(z: &CvMarginMatrix, tolerance: f64) -> Result<(WeightVector, f64)> {
    let (n, s_n) = (z.n_rows(), z.n_models());
    if s_n == 1 {
        let w = WeightVector::unit(1, 0);
        let obj = z.objective(w.as_slice());
        return Ok((w, obj));
    }
    let mut objective = vec![1.0; n];
    objective.extend([1.0, -1.0]);
    let mut lp = LinearProgram::maximize(objective);
    for i in 0..n {
        lp.set_upper_bound(i, 1.0 / n as f64);
    }
    for s in 0..s_n {
        let mut row: Vec<f64> = z.matrix().column(s).iter().copied().collect();
        row.extend([1.0, -1.0]);
        lp.add_constraint(row, Relation::Le, 0.0);
    }
    let opts = SimplexOptions {
        optimality_tol: tolerance.min(1e-9),
        ..SimplexOptions::default()
    };
    let sol = lp.solve(&opts)?;
    if !sol.optimal {
        return Err(SvmmaError::IterationLimit(sol.iterations));
    }
    let w = WeightVector::from_nearly_feasible(&sol.duals)?;
    let value = z.objective(w.as_slice());
    Ok((w, value))
}

/// Every candidate fitted on all of `train` with penalty `1/n`, embedded to
/// full length.
pub fn refit_full(
    train: &Dataset,
    cands: &CandidateSet,
    tolerance: f64,
) -> Result<(Vec<Coefficients>, Vec<FitReport>)> {
    let p = train.n_features();
    if cands.n_features() != p {
        return Err(SvmmaError::mismatch("candidate feature space", p, cands.n_features()));
    }
    let cfg = L2SolverConfig {
        lambda: penalty_for(train.n_samples()),
        tolerance,
        ..Default::default()
    };
    let fits: Vec<(Coefficients, FitReport)> = cands
        .models()
        .par_iter()
        .map(|spec| {
            let (beta, report) = train_l2_svm(&restrict(train, spec)?, &cfg)?;
            Ok((embed(&beta, spec, p)?, report))
        })
        .collect::<Result<_>>()?;
    Ok(fits.into_iter().unzip())
}

/// `sign(b + x'w)` with a zero score mapped to `+1`.
pub fn sign_label(score: f64) -> f64 {
    if score >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Label of `x_new` under the weighted combination of full-length fits.
pub fn predict(x_new: &[f64], w: &WeightVector, full_fits: &[Coefficients]) -> Result<f64> {
    let avg = average_coefficients(full_fits, w)?;
    if avg.dim() != x_new.len() {
        return Err(SvmmaError::mismatch("feature vector length", avg.dim(), x_new.len()));
    }
    Ok(sign_label(avg.decision(x_new)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    /// Permute rows before cutting folds; `None` keeps contiguous blocks.
    pub shuffle_seed: Option<u64>,
    pub tolerance: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            shuffle_seed: None,
            tolerance: 1e-6,
        }
    }
}

/// The fitted model-averaging estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmmaModel {
    pub weights: WeightVector,
    pub full_fits: Vec<Coefficients>,
    pub cv_objective: f64,
    pub converged: bool,
}

impl SvmmaModel {
    pub fn fit(train: &Dataset, cands: &CandidateSet, cfg: &CvConfig) -> Result<Self> {
        let plan = make_folds(train.n_samples(), cfg.folds, cfg.shuffle_seed)?;
        let fold_fits = fit_fold_models(train, cands, &plan, cfg.tolerance)?;
        let z = build_cv_matrix(train, cands, &plan, &fold_fits)?;
        let (weights, cv_objective) = solve_weights(&z, cfg.tolerance)?;
        let (full_fits, reports) = refit_full(train, cands, cfg.tolerance)?;
        let converged = fold_fits.all_converged() && reports.iter().all(|r| r.converged);
        Ok(SvmmaModel {
            weights,
            full_fits,
            cv_objective,
            converged,
        })
    }

    /// The averaged full-length coefficient vector.
    pub fn combined(&self) -> Coefficients {
        average_coefficients(&self.full_fits, &self.weights).expect("fits and weights agree")
    }

    pub fn predict(&self, x_new: &[f64]) -> Result<f64> {
        predict(x_new, &self.weights, &self.full_fits)
    }
}
