//! Comparators that share the candidate set: information-criterion
//! selection, smoothed IC weights, equal weights, bagging and AdaBoost.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{embed, restrict, CandidateSet};
use crate::cv::{penalty_for, sign_label, WeightVector};
use crate::data::Dataset;
use crate::error::{Result, SvmmaError};
use crate::rng::rng_from_seed;
use crate::svm::{hinge, train_l2_svm, Coefficients, L2SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IcKind {
    /// Penalty `log n` per covariate.
    Svmicl,
    /// Penalty `(log n)^{3/2}` per covariate.
    Svmich,
}

impl IcKind {
    pub fn penalty(self, n: usize) -> f64 {
        let l = (n as f64).ln();
        match self {
            IcKind::Svmicl => l,
            IcKind::Svmich => l.powf(1.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcScore {
    pub per_model: Vec<f64>,
    pub which: IcKind,
    /// Covariate count of each model, used to break ties.
    pub sizes: Vec<usize>,
}

/// Total training hinge loss of each full-data fit plus `p_s` times the
/// criterion's penalty.
pub fn ic_scores(
    train: &Dataset,
    full_fits: &[Coefficients],
    cands: &CandidateSet,
    which: IcKind,
) -> Result<IcScore> {
    if full_fits.len() != cands.len() {
        return Err(SvmmaError::mismatch("number of fits", cands.len(), full_fits.len()));
    }
    let penalty = which.penalty(train.n_samples());
    let mut per_model = Vec::with_capacity(full_fits.len());
    for (beta, spec) in full_fits.iter().zip(cands.models()) {
        let f = beta.decision_values(train)?;
        let loss: f64 = f.iter().zip(train.labels()).map(|(f, y)| hinge(y * f)).sum();
        per_model.push(loss + spec.size() as f64 * penalty);
    }
    Ok(IcScore {
        per_model,
        which,
        sizes: cands.models().iter().map(|m| m.size()).collect(),
    })
}

/// Unit weight on the smallest score; ties go to the smaller model, then the
/// smaller index.
pub fn select_by_ic(scores: &IcScore) -> WeightVector {
    let s = &scores.per_model;
    let size = |k: usize| scores.sizes.get(k).copied().unwrap_or(0);
    let best = (0..s.len())
        .min_by(|&a, &b| s[a].total_cmp(&s[b]).then(size(a).cmp(&size(b))).then(a.cmp(&b)))
        .expect("at least one model");
    WeightVector::unit(s.len(), best)
}

/// Softmax of `-score / n`.
pub fn smoothed_ic_weights(scores: &IcScore, n: usize) -> WeightVector {
    let scaled: Vec<f64> = scores.per_model.iter().map(|s| -s / n as f64).collect();
    let top = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scaled.iter().map(|v| (v - top).exp()).collect();
    let total: f64 = e.iter().sum();
    WeightVector::from_nearly_feasible(&e.iter().map(|v| v / total).collect::<Vec<_>>())
        .expect("softmax has positive mass")
}

pub fn uniform_weights(s_n: usize) -> Result<WeightVector> {
    if s_n == 0 {
        return Err(SvmmaError::invalid("need at least one candidate"));
    }
    Ok(WeightVector::uniform(s_n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleMethod {
    Bag,
    Ada,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub method: EnsembleMethod,
    pub rounds: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl EnsembleConfig {
    pub fn new(method: EnsembleMethod, rounds: usize, seed: u64) -> Self {
        EnsembleConfig {
            method,
            rounds,
            seed,
            tolerance: 1e-6,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(SvmmaError::invalid("ensemble needs at least one round"));
        }
        Ok(())
    }
}

/// Candidate used in round `t` (zero-based).
fn round_robin(t: usize, cands: &CandidateSet) -> usize {
    t % cands.len()
}

fn fit_candidate(
    data: &Dataset,
    cands: &CandidateSet,
    s: usize,
    sample_weights: Option<Vec<f64>>,
    tolerance: f64,
) -> Result<Coefficients> {
    let spec = &cands.models()[s];
    let cfg = L2SolverConfig {
        lambda: penalty_for(data.n_samples()),
        tolerance,
        sample_weights,
        ..Default::default()
    };
    let (beta, _) = train_l2_svm(&restrict(data, spec)?, &cfg)?;
    embed(&beta, spec, cands.n_features())
}

/// Base learners fitted on bootstrap resamples, combined by majority vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingEnsemble {
    pub learners: Vec<Coefficients>,
}

impl BaggingEnsemble {
    pub fn fit(train: &Dataset, cands: &CandidateSet, cfg: &EnsembleConfig) -> Result<Self> {
        cfg.validate()?;
        let n = train.n_samples();
        let mut rng = rng_from_seed(cfg.seed);
        let resamples: Vec<Vec<usize>> = (0..cfg.rounds)
            .map(|_| (0..n).map(|_| rng.random_range(0..n)).collect())
            .collect();
        let learners = resamples
            .par_iter()
            .enumerate()
            .map(|(t, rows)| {
                let boot = train.select_rows(rows);
                fit_candidate(&boot, cands, round_robin(t, cands), None, cfg.tolerance)
            })
            .collect::<Result<_>>()?;
        Ok(BaggingEnsemble { learners })
    }

    /// Majority vote; a tied vote gives `+1`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let votes: f64 = self.learners.iter().map(|b| sign_label(b.decision(x))).sum();
        sign_label(votes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoostStatus {
    Completed,
    /// A later round reached weighted error 0.5 and boosting stopped there.
    StoppedEarly { rounds: usize },
    /// The first learner was no better than chance; it predicts alone.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostEnsemble {
    pub learners: Vec<Coefficients>,
    pub alphas: Vec<f64>,
    pub errors: Vec<f64>,
    pub status: BoostStatus,
    /// Sample weights after each completed round.
    pub weight_history: Vec<Vec<f64>>,
}

pub const ADABOOST_EPS_CLAMP: f64 = 1e-8;

impl AdaBoostEnsemble {
    pub fn fit(train: &Dataset, cands: &CandidateSet, cfg: &EnsembleConfig) -> Result<Self> {
        cfg.validate()?;
        let n = train.n_samples();
        let y = train.labels();
        let mut d = vec![1.0 / n as f64; n];
        let mut out = AdaBoostEnsemble {
            learners: Vec::new(),
            alphas: Vec::new(),
            errors: Vec::new(),
            status: BoostStatus::Completed,
            weight_history: Vec::new(),
        };
        for t in 0..cfg.rounds {
            let beta = fit_candidate(
                train,
                cands,
                round_robin(t, cands),
                Some(d.clone()),
                cfg.tolerance,
            )?;
            let h: Vec<f64> = beta
                .decision_values(train)?
                .into_iter()
                .map(sign_label)
                .collect();
            let eps: f64 = (0..n).filter(|&i| h[i] != y[i]).map(|i| d[i]).sum();
            if eps >= 0.5 {
                if t == 0 {
                    out.learners.push(beta);
                    out.alphas.push(1.0);
                    out.errors.push(eps);
                    out.status = BoostStatus::Degenerate;
                } else {
                    out.status = BoostStatus::StoppedEarly { rounds: t };
                }
                break;
            }
            let eps_c = eps.clamp(ADABOOST_EPS_CLAMP, 1.0 - ADABOOST_EPS_CLAMP);
            let alpha = 0.5 * ((1.0 - eps_c) / eps_c).ln();
            for i in 0..n {
                d[i] *= (-alpha * y[i] * h[i]).exp();
            }
            let total: f64 = d.iter().sum();
            d.iter_mut().for_each(|v| *v /= total);
            out.learners.push(beta);
            out.alphas.push(alpha);
            out.errors.push(eps);
            out.weight_history.push(d.clone());
        }
        Ok(out)
    }

    /// `sign(sum_t alpha_t h_t(x))`, zero mapped to `+1`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let score: f64 = self
            .learners
            .iter()
            .zip(&self.alphas)
            .map(|(b, a)| a * sign_label(b.decision(x)))
            .sum();
        sign_label(score)
    }
}

pub fn bagging_predict(
    train: &Dataset,
    cands: &CandidateSet,
    cfg: &EnsembleConfig,
    x_new: &[f64],
) -> Result<f64> {
    check_len(x_new, cands)?;
    Ok(BaggingEnsemble::fit(train, cands, cfg)?.predict(x_new))
}

pub fn adaboost_predict(
    train: &Dataset,
    cands: &CandidateSet,
    cfg: &EnsembleConfig,
    x_new: &[f64],
) -> Result<f64> {
    check_len(x_new, cands)?;
    Ok(AdaBoostEnsemble::fit(train, cands, cfg)?.predict(x_new))
}

fn check_len(x: &[f64], cands: &CandidateSet) -> Result<()> {
    if x.len() != cands.n_features() {
        return Err(SvmmaError::mismatch("feature vector length", cands.n_features(), x.len()));
    }
    Ok(())
}
