//! Sequential minimal optimization for the dual of the L2-penalized SVM.
//!
//! With `C = 1 / (n lambda)` the problem is the standard soft-margin dual
//!
//! ```text
//! min_a  (1/2) a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= C c_i
//! ```
//!
//! with `Q_ij = y_i y_j x_i'x_j`. Working pairs are chosen by the
//! second-order rule of Fan, Chen and Lin (2005). The pair-violation
//! threshold is tightened until the duality gap, measured in the scale of
//! the original objective, meets the requested relative tolerance.

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::error::Result;

use super::{mean_hinge, optimal_intercept, Coefficients, FitReport, L2SolverConfig};

const TAU: f64 = 1e-12;
/// Largest `n` for which the full Gram matrix is cached.
const GRAM_CACHE_LIMIT: usize = 6000;

enum Gram<'a> {
    Cached(DMatrix<f64>),
    OnDemand(&'a DMatrix<f64>),
}

impl Gram<'_> {
    fn new(x: &DMatrix<f64>) -> Gram<'_> {
        if x.nrows() <= GRAM_CACHE_LIMIT {
            Gram::Cached(x * x.transpose())
        } else {
            Gram::OnDemand(x)
        }
    }

    fn column_into(&self, i: usize, out: &mut Vec<f64>) {
        out.clear();
        match self {
            Gram::Cached(k) => out.extend_from_slice(k.column(i).as_slice()),
            Gram::OnDemand(x) => {
                let xi = x.row(i).transpose();
                out.extend((*x * xi).iter().copied());
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        match self {
            Gram::Cached(k) => k.diagonal().iter().copied().collect(),
            Gram::OnDemand(x) => x.row_iter().map(|r| r.norm_squared()).collect(),
        }
    }
}

struct Evaluation {
    coefficients: Coefficients,
    primal: f64,
    gap: f64,
}

struct Smo<'a> {
    data: &'a Dataset,
    y: &'a [f64],
    c: &'a [f64],
    lambda: f64,
    upper: Vec<f64>,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    diag: Vec<f64>,
    gram: Gram<'a>,
    col_i: Vec<f64>,
    col_j: Vec<f64>,
}

impl<'a> Smo<'a> {
    fn new(data: &'a Dataset, c: &'a [f64], lambda: f64) -> Self {
        let n = data.n_samples();
        let cap = 1.0 / (n as f64 * lambda);
        let gram = Gram::new(data.features());
        let diag = gram.diagonal();
        Smo {
            data,
            y: data.labels(),
            c,
            lambda,
            upper: c.iter().map(|ci| cap * ci).collect(),
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            diag,
            gram,
            col_i: Vec::with_capacity(n),
            col_j: Vec::with_capacity(n),
        }
    }

    /// Maximal-violation first index, second-order second index, and the
    /// current violation `m(a) - M(a)`.
    fn select(&mut self) -> Option<(usize, usize, f64)> {
        let n = self.alpha.len();
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let v = if self.y[t] > 0.0 {
                (self.alpha[t] < self.upper[t]).then(|| -self.grad[t])
            } else {
                (self.alpha[t] > 0.0).then(|| self.grad[t])
            };
            if let Some(v) = v {
                if v >= gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let i = i_sel?;
        self.gram.column_into(i, &mut self.col_i);
        let kii = self.diag[i];

        let mut gmax2 = f64::NEG_INFINITY;
        let mut best = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..n {
            let v = if self.y[t] > 0.0 {
                (self.alpha[t] > 0.0).then(|| self.grad[t])
            } else {
                (self.alpha[t] < self.upper[t]).then(|| -self.grad[t])
            };
            let Some(v) = v else { continue };
            gmax2 = gmax2.max(v);
            let grad_diff = gmax + v;
            if grad_diff > 0.0 {
                let quad = (kii + self.diag[t] - 2.0 * self.col_i[t]).max(TAU);
                let obj_diff = -grad_diff * grad_diff / quad;
                if obj_diff <= best {
                    best = obj_diff;
                    j_sel = Some(t);
                }
            }
        }
        let violation = gmax + gmax2;
        j_sel.map(|j| (i, j, violation))
    }

    fn update(&mut self, i: usize, j: usize) {
        self.gram.column_into(j, &mut self.col_j);
        let (ci, cj) = (self.upper[i], self.upper[j]);
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let kij = self.col_i[j];
        let quad = (self.diag[i] + self.diag[j] - 2.0 * kij).max(TAU);
        let (mut ai, mut aj) = (old_i, old_j);
        if self.y[i] != self.y[j] {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let di = (ai - old_i) * self.y[i];
        let dj = (aj - old_j) * self.y[j];
        for (k, g) in self.grad.iter_mut().enumerate() {
            *g += self.y[k] * (self.col_i[k] * di + self.col_j[k] * dj);
        }
    }

    /// Primal point from the current dual iterate and the certified gap,
    /// both in the scale of the original objective.
    fn evaluate(&self) -> Result<Evaluation> {
        let x = self.data.features();
        let ay = DVector::from_iterator(
            self.alpha.len(),
            self.alpha.iter().zip(self.y).map(|(a, y)| a * y),
        );
        let w = x.transpose() * ay;
        let w_sq = w.norm_squared();
        let f = x * &w;
        let b = optimal_intercept(f.as_slice(), self.y, self.c);
        let margins: Vec<f64> = f.iter().map(|v| v + b).collect();
        let primal = mean_hinge(&margins, self.y, self.c) + 0.5 * self.lambda * w_sq;
        let dual = self.lambda * (self.alpha.iter().sum::<f64>() - 0.5 * w_sq);
        Ok(Evaluation {
            coefficients: Coefficients::new(b, w.iter().copied().collect()),
            primal,
            gap: (primal - dual).max(0.0),
        })
    }
}

pub(super) fn solve(
    data: &Dataset,
    c: &[f64],
    cfg: &L2SolverConfig,
) -> Result<(Coefficients, FitReport)> {
    let n = data.n_samples();
    let max_iter = cfg.max_epochs.saturating_mul(n).max(1);
    let check_every = (10 * n).max(100);
    let mut smo = Smo::new(data, c, cfg.lambda);
    let mut eps = 1e-3;
    let mut iter = 0usize;
    let mut since_check = 0usize;

    let finish = |eval: Evaluation, iter: usize, converged: bool| {
        let report = FitReport {
            objective: eval.primal,
            certified_gap: eval.gap,
            epochs_used: iter.div_ceil(n),
            converged,
        };
        Ok((eval.coefficients, report))
    };
    let target = |primal: f64| cfg.tolerance * primal.abs().max(f64::MIN_POSITIVE);

    loop {
        let selected = smo.select();
        let stalled = selected.is_none_or(|(_, _, v)| v < eps);
        if stalled || since_check >= check_every || iter >= max_iter {
            let eval = smo.evaluate()?;
            since_check = 0;
            if eval.gap <= target(eval.primal) {
                return finish(eval, iter, true);
            }
            if iter >= max_iter || selected.is_none() {
                return finish(eval, iter, false);
            }
            if stalled {
                if eps <= 1e-14 {
                    return finish(eval, iter, false);
                }
                eps *= 0.1;
                continue;
            }
        }
        let (i, j, _) = selected.expect("checked above");
        smo.update(i, j);
        iter += 1;
        since_check += 1;
    }
}
