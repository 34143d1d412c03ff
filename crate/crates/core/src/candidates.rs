//! Candidate submodels and the embedding of their coefficients into the
//! full feature space.

use serde::{Deserialize, Serialize};

use crate::cv::WeightVector;
use crate::data::Dataset;
use crate::error::{Result, SvmmaError};
use crate::screening::FeatureOrdering;
use crate::svm::Coefficients;

/// Feature columns of one candidate model. The intercept is always included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    feature_indices: Vec<usize>,
}

impl ModelSpec {
    pub fn new(feature_indices: Vec<usize>, p: usize) -> Result<Self> {
        if feature_indices.is_empty() {
            return Err(SvmmaError::invalid("a candidate needs at least one feature"));
        }
        let mut seen = vec![false; p];
        for &j in &feature_indices {
            if j >= p {
                return Err(SvmmaError::invalid(format!(
                    "feature index {j} out of range for {p} features"
                )));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(SvmmaError::invalid(format!("feature {j} repeated")));
            }
        }
        Ok(ModelSpec { feature_indices })
    }

    pub fn feature_indices(&self) -> &[usize] {
        &self.feature_indices
    }

    /// Number of covariates, excluding the intercept.
    pub fn size(&self) -> usize {
        self.feature_indices.len()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.feature_indices.contains(&j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    models: Vec<ModelSpec>,
    nested: bool,
    n_features: usize,
}

impl CandidateSet {
    /// Wraps arbitrary models; `nested` is set when each model's indices
    /// extend the previous model's as a prefix.
    pub fn from_models(models: Vec<ModelSpec>, n_features: usize) -> Result<Self> {
        if models.is_empty() {
            return Err(SvmmaError::invalid("candidate set is empty"));
        }
        if let Some(m) = models
            .iter()
            .find(|m| m.feature_indices.iter().any(|&j| j >= n_features))
        {
            return Err(SvmmaError::invalid(format!(
                "candidate {:?} exceeds {n_features} features",
                m.feature_indices
            )));
        }
        let nested = models.windows(2).all(|w| {
            w[1].feature_indices.len() > w[0].feature_indices.len()
                && w[1].feature_indices.starts_with(&w[0].feature_indices)
        });
        Ok(CandidateSet {
            models,
            nested,
            n_features,
        })
    }

    pub fn models(&self) -> &[ModelSpec] {
        &self.models
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn is_nested(&self) -> bool {
        self.nested
    }

    /// Dimension `p` of the full feature space.
    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

/// Model `s` (1-based) holds the first `s` features of the ordering.
pub fn build_candidates(ordering: &FeatureOrdering, s_n: usize) -> Result<CandidateSet> {
    let p = ordering.n_features();
    if s_n == 0 || s_n > p {
        return Err(SvmmaError::invalid(format!(
            "number of candidates {s_n} must lie in 1..={p}"
        )));
    }
    let features = ordering.features();
    let models = (1..=s_n)
        .map(|s| ModelSpec::new(features[..s].to_vec(), p))
        .collect::<Result<Vec<_>>>()?;
    let set = CandidateSet::from_models(models, p)?;
    debug_assert!(set.nested);
    Ok(set)
}

/// Columns of `data` in `spec` order.
pub fn restrict(data: &Dataset, spec: &ModelSpec) -> Result<Dataset> {
    data.select_columns(&spec.feature_indices)
}

/// Places submodel weights at their feature indices in a length-`p` vector.
pub fn embed(beta: &Coefficients, spec: &ModelSpec, p: usize) -> Result<Coefficients> {
    if beta.dim() != spec.size() {
        return Err(SvmmaError::mismatch(
            "submodel coefficient length",
            spec.size(),
            beta.dim(),
        ));
    }
    let mut weights = vec![0.0; p];
    for (&j, &w) in spec.feature_indices.iter().zip(&beta.weights) {
        if j >= p {
            return Err(SvmmaError::invalid(format!(
                "feature index {j} out of range for {p} features"
            )));
        }
        weights[j] = w;
    }
    Ok(Coefficients::new(beta.intercept, weights))
}

/// Inverse of [`embed`]: the entries of a full-length vector at `spec`'s
/// indices.
pub fn project(beta: &Coefficients, spec: &ModelSpec) -> Result<Coefficients> {
    let weights = spec
        .feature_indices
        .iter()
        .map(|&j| {
            beta.weights.get(j).copied().ok_or_else(|| {
                SvmmaError::invalid(format!("feature index {j} out of range"))
            })
        })
        .collect::<Result<_>>()?;
    Ok(Coefficients::new(beta.intercept, weights))
}

/// `sum_s w_s beta_s` over full-length coefficient vectors.
pub fn average_coefficients(embedded: &[Coefficients], w: &WeightVector) -> Result<Coefficients> {
    if embedded.len() != w.len() {
        return Err(SvmmaError::mismatch(
            "number of weights",
            embedded.len(),
            w.len(),
        ));
    }
    let p = embedded.first().map_or(0, Coefficients::dim);
    if let Some(bad) = embedded.iter().find(|c| c.dim() != p) {
        return Err(SvmmaError::mismatch("coefficient length", p, bad.dim()));
    }
    let mut out = Coefficients::zeros(p);
    for (beta, &ws) in embedded.iter().zip(w.as_slice()) {
        if ws == 0.0 {
            continue;
        }
        out.intercept += ws * beta.intercept;
        for (o, b) in out.weights.iter_mut().zip(&beta.weights) {
            *o += ws * b;
        }
    }
    Ok(out)
}
