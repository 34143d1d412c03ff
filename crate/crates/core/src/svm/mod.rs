//! Linear SVM training with an unpenalized intercept.
//!
//! The L2-penalized problem
//!
//! ```text
//! min_{b, w}  (1/n) sum_i c_i (1 - y_i (b + x_i'w))_+  +  (lambda/2) |w|^2
//! ```
//!
//! is solved in the dual by sequential minimal optimization (pairwise
//! coordinate ascent that keeps the equality constraint from the intercept
//! satisfied). For `lambda = 0` the problem is a linear program and is
//! solved exactly by the simplex. Either way the returned intercept is the
//! exact minimizer of the hinge term for the returned weights, and the
//! reported gap is `primal - dual`, a certified bound on suboptimality.

mod hinge_lp;
mod smo;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Result, SvmmaError};

pub(crate) use hinge_lp::solve_hinge_lp;

/// `max(1 - margin, 0)`.
#[inline]
pub fn hinge(margin: f64) -> f64 {
    (1.0 - margin).max(0.0)
}

/// Intercept plus feature weights of one (sub)model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub intercept: f64,
    pub weights: Vec<f64>,
}

impl Coefficients {
    pub fn new(intercept: f64, weights: Vec<f64>) -> Self {
        Coefficients { intercept, weights }
    }

    pub fn zeros(p: usize) -> Self {
        Coefficients::new(0.0, vec![0.0; p])
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `b + x'w`.
    pub fn decision(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        self.intercept + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Decision values for every row of `data`.
    pub fn decision_values(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.n_features() != self.dim() {
            return Err(SvmmaError::mismatch(
                "coefficient length",
                data.n_features(),
                self.dim(),
            ));
        }
        let w = nalgebra::DVector::from_column_slice(&self.weights);
        let f = data.features() * w;
        Ok(f.iter().map(|v| v + self.intercept).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.intercept.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2SolverConfig {
    pub lambda: f64,
    /// Target relative duality gap.
    pub tolerance: f64,
    /// Iteration cap in units of `n` pair updates.
    pub max_epochs: usize,
    pub sample_weights: Option<Vec<f64>>,
}

impl Default for L2SolverConfig {
    fn default() -> Self {
        L2SolverConfig {
            lambda: 1.0,
            tolerance: 1e-6,
            max_epochs: 10_000,
            sample_weights: None,
        }
    }
}

impl L2SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        L2SolverConfig {
            lambda,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub objective: f64,
    pub certified_gap: f64,
    pub epochs_used: usize,
    pub converged: bool,
}

/// Sample weights rescaled to mean one; `None` means all ones.
pub(crate) fn normalized_weights(n: usize, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let Some(w) = weights else {
        return Ok(vec![1.0; n]);
    };
    if w.len() != n {
        return Err(SvmmaError::mismatch("sample weight count", n, w.len()));
    }
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(SvmmaError::invalid("sample weights must be finite and nonnegative"));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(SvmmaError::invalid("sample weights must have a positive sum"));
    }
    let scale = n as f64 / total;
    Ok(w.iter().map(|v| v * scale).collect())
}

fn check_dims(data: &Dataset, beta: &Coefficients) -> Result<()> {
    if data.n_features() != beta.dim() {
        return Err(SvmmaError::mismatch(
            "coefficient length",
            data.n_features(),
            beta.dim(),
        ));
    }
    Ok(())
}

/// Weighted average hinge loss `(1/n) sum c_i hinge(y_i f_i)` with `c`
/// already normalized to mean one.
fn mean_hinge(decisions: &[f64], labels: &[f64], c: &[f64]) -> f64 {
    let total: f64 = decisions
        .iter()
        .zip(labels)
        .zip(c)
        .map(|((f, y), c)| c * hinge(y * f))
        .sum();
    total / decisions.len() as f64
}

/// Penalized empirical hinge risk with an L2 penalty on the weights only.
pub fn objective_l2(
    data: &Dataset,
    beta: &Coefficients,
    lambda: f64,
    sample_weights: Option<&[f64]>,
) -> Result<f64> {
    check_dims(data, beta)?;
    let c = normalized_weights(data.n_samples(), sample_weights)?;
    let f = beta.decision_values(data)?;
    let penalty: f64 = beta.weights.iter().map(|w| w * w).sum();
    Ok(mean_hinge(&f, data.labels(), &c) + 0.5 * lambda * penalty)
}

/// Average hinge risk with an L1 penalty on the weights only.
pub fn objective_l1(data: &Dataset, beta: &Coefficients, lambda: f64) -> Result<f64> {
    check_dims(data, beta)?;
    let f = beta.decision_values(data)?;
    let c = vec![1.0; data.n_samples()];
    let penalty: f64 = beta.weights.iter().map(|w| w.abs()).sum();
    Ok(mean_hinge(&f, data.labels(), &c) + lambda * penalty)
}

/// Exact minimizer over `b` of `sum_i c_i hinge(y_i (b + f_i))`.
///
/// The function is convex and piecewise linear with a breakpoint at
/// `y_i - f_i` for each sample. Its slope starts at minus the positive-class
/// weight and each breakpoint adds `c_i`, so the minimizer is the first
/// breakpoint where the running slope turns nonnegative.
pub(crate) fn optimal_intercept(f: &[f64], labels: &[f64], c: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..f.len()).collect();
    let bp = |i: usize| labels[i] - f[i];
    order.sort_by(|&a, &b| bp(a).total_cmp(&bp(b)).then(a.cmp(&b)));
    let mut slope: f64 = -labels
        .iter()
        .zip(c)
        .filter(|(y, _)| **y > 0.0)
        .map(|(_, c)| c)
        .sum::<f64>();
    for &i in &order {
        slope += c[i];
        if slope >= 0.0 {
            return bp(i);
        }
    }
    order.last().map_or(0.0, |&i| bp(i))
}

/// Trains a linear SVM with an L2 penalty on the weights.
///
/// Never fails on hard data: if the iteration cap is hit the best iterate
/// is returned with `converged = false`.
pub fn train_l2_svm(data: &Dataset, cfg: &L2SolverConfig) -> Result<(Coefficients, FitReport)> {
    if !(cfg.lambda >= 0.0 && cfg.lambda.is_finite()) {
        return Err(SvmmaError::invalid(format!(
            "lambda must be finite and nonnegative, got {}",
            cfg.lambda
        )));
    }
    if !(cfg.tolerance > 0.0) {
        return Err(SvmmaError::invalid("tolerance must be positive"));
    }
    let n = data.n_samples();
    let c = normalized_weights(n, cfg.sample_weights.as_deref())?;
    if cfg.lambda == 0.0 {
        let upper: Vec<f64> = c.iter().map(|ci| ci / n as f64).collect();
        let fit = solve_hinge_lp(data, &upper, 0.0)?;
        let report = FitReport {
            objective: fit.primal,
            certified_gap: (fit.primal - fit.dual).max(0.0),
            epochs_used: fit.iterations.div_ceil(n.max(1)),
            converged: fit.optimal,
        };
        return Ok((fit.coefficients, report));
    }
    smo::solve(data, &c, cfg)
}
