//! Test-set error rate and normalized hinge loss.

use serde::{Deserialize, Serialize};

use crate::candidates::average_coefficients;
use crate::cv::{margin_matrix, solve_weights, CvMarginMatrix, WeightVector};
use crate::data::Dataset;
use crate::error::{Result, SvmmaError};
use crate::svm::{hinge, Coefficients};

/// Denominators at or below this make the ratio meaningless.
pub const SEPARABLE_THRESHOLD: f64 = 1e-12;

pub fn error_rate(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(SvmmaError::mismatch("prediction count", truth.len(), predictions.len()));
    }
    if truth.is_empty() {
        return Err(SvmmaError::invalid("no labels to compare"));
    }
    let wrong = predictions.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / truth.len() as f64)
}

pub fn average_hinge(data: &Dataset, beta: &Coefficients) -> Result<f64> {
    let f = beta.decision_values(data)?;
    let total: f64 = f.iter().zip(data.labels()).map(|(f, y)| hinge(y * f)).sum();
    Ok(total / data.n_samples() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Nhl {
    Ratio(f64),
    /// The best combination has (numerically) zero test hinge loss.
    Separable,
}

impl Nhl {
    pub fn value(self) -> Option<f64> {
        match self {
            Nhl::Ratio(r) => Some(r),
            Nhl::Separable => None,
        }
    }
}

/// The smallest test hinge risk reachable by any simplex weight over a fixed
/// set of full-data fits. Built once per replication and shared by methods.
#[derive(Debug, Clone)]
pub struct TestOracle {
    test: Dataset,
    fits: Vec<Coefficients>,
    margins: CvMarginMatrix,
    best_weights: WeightVector,
    best_risk: f64,
}

impl TestOracle {
    pub fn new(test: &Dataset, full_fits: &[Coefficients]) -> Result<Self> {
        let margins = margin_matrix(test, full_fits)?;
        let (best_weights, best_risk) = solve_weights(&margins, 1e-10)?;
        Ok(TestOracle {
            test: test.clone(),
            fits: full_fits.to_vec(),
            margins,
            best_weights,
            best_risk,
        })
    }

    pub fn best_risk(&self) -> f64 {
        self.best_risk
    }

    pub fn best_weights(&self) -> &WeightVector {
        &self.best_weights
    }

    pub fn margins(&self) -> &CvMarginMatrix {
        &self.margins
    }

    /// Test hinge risk of the averaged coefficient vector.
    pub fn risk(&self, w: &WeightVector) -> Result<f64> {
        average_hinge(&self.test, &average_coefficients(&self.fits, w)?)
    }

    pub fn nhl(&self, w: &WeightVector) -> Result<Nhl> {
        let numerator = self.risk(w)?;
        if self.best_risk <= SEPARABLE_THRESHOLD {
            return Ok(Nhl::Separable);
        }
        Ok(Nhl::Ratio(numerator / self.best_risk))
    }
}

/// Ratio of the method's test hinge risk to the best risk over the simplex.
pub fn nhl(test: &Dataset, full_fits: &[Coefficients], w_method: &WeightVector) -> Result<Nhl> {
    TestOracle::new(test, full_fits)?.nhl(w_method)
}

/// Per-method aggregate over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    /// Mean over replications with a defined ratio; `None` when there are none.
    pub nhl: Option<f64>,
    pub er: f64,
    pub separable: usize,
    pub per_replication: Option<(Vec<Option<f64>>, Vec<f64>)>,
}

impl EvalReport {
    pub fn from_replications(method: &str, nhl: &[Nhl], er: &[f64], keep: bool) -> Result<Self> {
        if er.is_empty() {
            return Err(SvmmaError::invalid("no replications"));
        }
        if er.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(SvmmaError::invalid("error rate outside [0, 1]"));
        }
        let ratios: Vec<f64> = nhl.iter().filter_map(|v| v.value()).collect();
        Ok(EvalReport {
            method: method.to_string(),
            nhl: mean(&ratios),
            er: mean(er).expect("nonempty"),
            separable: nhl.len() - ratios.len(),
            per_replication: keep
                .then(|| (nhl.iter().map(|v| v.value()).collect(), er.to_vec())),
        })
    }
}

pub fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Standard error of the mean, `sd / sqrt(k)` with the `k - 1` divisor.
pub fn standard_error(v: &[f64]) -> Option<f64> {
    if v.len() < 2 {
        return None;
    }
    let m = mean(v)?;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    Some((var / v.len() as f64).sqrt())
}
