//! Feature screening along an L1-penalized SVM path.
//!
//! For `l = 0..=L` the L1 SVM is fitted at `lambda_l = a + l (b - a) / L`.
//! Features are recorded in the order their coefficients first reach zero
//! as the penalty grows; the list is then reversed so the most persistent
//! features come first, right after the intercept.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Result, SvmmaError};
use crate::svm::{solve_hinge_lp, Coefficients};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningConfig {
    /// Smallest penalty on the grid.
    pub a: f64,
    /// Largest penalty on the grid.
    pub b: f64,
    /// Number of grid intervals; the grid has `steps + 1` points.
    pub steps: usize,
    pub tolerance: f64,
    /// Coefficients with magnitude at or below this count as zero.
    pub zero_threshold: f64,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        ScreeningConfig {
            a: 0.001,
            b: 10.0,
            steps: 50,
            tolerance: 1e-6,
            zero_threshold: 1e-8,
        }
    }
}

impl ScreeningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < self.b && self.b.is_finite()) {
            return Err(SvmmaError::invalid(format!(
                "penalty grid needs 0 < a < b, got a={} b={}",
                self.a, self.b
            )));
        }
        if self.steps == 0 {
            return Err(SvmmaError::invalid("grid needs at least one step"));
        }
        if !(self.tolerance > 0.0) || !(self.zero_threshold >= 0.0) {
            return Err(SvmmaError::invalid(
                "tolerance must be positive and zero threshold nonnegative",
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|l| self.a + l as f64 * (self.b - self.a) / self.steps as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Fit {
    pub coefficients: Coefficients,
    pub objective: f64,
    pub converged: bool,
}

/// Fits `min (1/n) sum hinge + lambda |w|_1` exactly as a linear program.
pub fn train_l1_svm(data: &Dataset, lambda: f64, tolerance: f64) -> Result<L1Fit> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SvmmaError::invalid(format!(
            "L1 penalty must be positive, got {lambda}"
        )));
    }
    let n = data.n_samples();
    let upper = vec![1.0 / n as f64; n];
    let fit = solve_hinge_lp(data, &upper, lambda)?;
    let gap = fit.primal - fit.dual;
    Ok(L1Fit {
        coefficients: fit.coefficients,
        objective: fit.primal,
        converged: fit.optimal && gap <= tolerance * fit.primal.abs().max(1.0),
    })
}

/// Penalty above which every L1 solution has all weights zero:
/// `max_j (1/n) sum_i |x_ij|`.
pub fn lambda_max(data: &Dataset) -> f64 {
    let n = data.n_samples() as f64;
    data.features()
        .column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>() / n)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Term {
    Intercept,
    Feature(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureOrdering {
    order: Vec<Term>,
    activation_step: Vec<Option<usize>>,
    warnings: Vec<String>,
}

impl FeatureOrdering {
    /// Intercept first, then the features from strongest to weakest.
    pub fn order(&self) -> &[Term] {
        &self.order
    }

    /// Feature indices from strongest to weakest.
    pub fn features(&self) -> Vec<usize> {
        self.order
            .iter()
            .filter_map(|t| match t {
                Term::Feature(j) => Some(*j),
                Term::Intercept => None,
            })
            .collect()
    }

    /// Grid step at which each feature was first zero, if ever.
    pub fn activation_step(&self) -> &[Option<usize>] {
        &self.activation_step
    }

    pub fn n_features(&self) -> usize {
        self.activation_step.len()
    }

    /// Solver non-convergence messages collected along the path.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// An ordering given directly as feature indices, strongest first.
    pub fn from_features(features: &[usize]) -> Result<Self> {
        let p = features.len();
        let mut seen = vec![false; p];
        for &j in features {
            if j >= p || std::mem::replace(&mut seen[j], true) {
                return Err(SvmmaError::invalid(format!(
                    "feature list is not a permutation of 0..{p}"
                )));
            }
        }
        let order = std::iter::once(Term::Intercept)
            .chain(features.iter().map(|&j| Term::Feature(j)))
            .collect();
        Ok(FeatureOrdering {
            order,
            activation_step: vec![None; p],
            warnings: Vec::new(),
        })
    }
}

/// Assembles the ordering from the weight vectors fitted along the grid
/// (ascending penalty).
///
/// Features that are zero for the first time at step `l` are appended in
/// ascending `|w|` at step `l - 1`, then ascending index. A feature that
/// becomes nonzero again later keeps its first death. Features never zero on
/// the grid are appended last in ascending `|w|` at the final step, so that
/// after the reversal they lead the ordering by descending magnitude.
pub fn ordering_from_path(path: &[Vec<f64>], zero_threshold: f64) -> FeatureOrdering {
    let p = path.first().map_or(0, Vec::len);
    let mut activation_step = vec![None; p];
    let mut deaths = Vec::with_capacity(p);
    for (l, weights) in path.iter().enumerate() {
        let mut newly: Vec<usize> = (0..p)
            .filter(|&j| activation_step[j].is_none() && weights[j].abs() <= zero_threshold)
            .collect();
        let prev = |j: usize| if l == 0 { 0.0 } else { path[l - 1][j].abs() };
        newly.sort_by(|&x, &y| prev(x).total_cmp(&prev(y)).then(x.cmp(&y)));
        for j in newly {
            activation_step[j] = Some(l);
            deaths.push(j);
        }
    }
    let last = path.last();
    let mag = |j: usize| last.map_or(0.0, |w| w[j].abs());
    let mut survivors: Vec<usize> = (0..p).filter(|&j| activation_step[j].is_none()).collect();
    survivors.sort_by(|&x, &y| mag(x).total_cmp(&mag(y)).then(y.cmp(&x)));
    deaths.extend(survivors);

    let order = std::iter::once(Term::Intercept)
        .chain(deaths.iter().rev().map(|&j| Term::Feature(j)))
        .collect();
    FeatureOrdering {
        order,
        activation_step,
        warnings: Vec::new(),
    }
}

/// Orders features by their persistence along the L1 path.
pub fn screen_features(data: &Dataset, cfg: &ScreeningConfig) -> Result<FeatureOrdering> {
    cfg.validate()?;
    let grid = cfg.grid();
    let fits: Vec<L1Fit> = grid
        .par_iter()
        .map(|&lambda| train_l1_svm(data, lambda, cfg.tolerance))
        .collect::<Result<_>>()?;
    let path: Vec<Vec<f64>> = fits.iter().map(|f| f.coefficients.weights.clone()).collect();
    let mut ordering = ordering_from_path(&path, cfg.zero_threshold);
    ordering.warnings = fits
        .iter()
        .zip(&grid)
        .filter(|(f, _)| !f.converged)
        .map(|(_, lambda)| format!("L1 fit at lambda={lambda} did not converge"))
        .collect();
    Ok(ordering)
}
