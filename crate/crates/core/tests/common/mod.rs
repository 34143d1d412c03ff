//! Independent oracles and invariant checks shared by the integration tests.
//! Nothing here calls the library's solvers.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use svmma::candidates::{restrict, CandidateSet};
use svmma::cv::{FoldFits, FoldPlan};
use svmma::{Coefficients, Dataset, WeightVector};

pub fn hinge(t: f64) -> f64 {
    (1.0 - t).max(0.0)
}

/// A random dataset with entries in `[-2, 2]` and both labels present.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let mut labels: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    labels[0] = 1.0;
    labels[n - 1] = -1.0;
    Dataset::from_rows(&rows, labels).unwrap()
}

pub fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -rng.random_range(1e-12f64..1.0).ln()).collect();
    let total: f64 = e.iter().sum();
    e.iter().map(|v| v / total).collect()
}

pub fn assert_on_simplex(w: &[f64]) {
    assert!(w.iter().all(|&v| (0.0..=1.0).contains(&v)), "{w:?}");
    let sum: f64 = w.iter().sum();
    assert!((sum - 1.0).abs() <= 1e-12, "weights sum to {sum}");
}

/// `(1/n) sum_i hinge(Z_i . w)` evaluated directly.
pub fn simplex_objective(z: &DMatrix<f64>, w: &[f64]) -> f64 {
    let n = z.nrows();
    (0..n)
        .map(|i| hinge((0..w.len()).map(|s| z[(i, s)] * w[s]).sum()))
        .sum::<f64>()
        / n as f64
}

/// The cross-validation criterion straight from its definition: each row
/// is scored by the weighted sum of its candidates' held-out decisions.
pub fn direct_cv(
    train: &Dataset,
    cands: &CandidateSet,
    plan: &FoldPlan,
    fits: &FoldFits,
    w: &[f64],
) -> f64 {
    let n = train.n_samples();
    let mut total = 0.0;
    for i in 0..n {
        let j = plan.fold_of()[i];
        let mut f = 0.0;
        for (s, spec) in cands.models().iter().enumerate() {
            let beta = &fits.coefficients[j][s];
            let x = restrict(train, spec).unwrap().row(i);
            let d: f64 = beta.intercept + x.iter().zip(&beta.weights).map(|(a, b)| a * b).sum::<f64>();
            f += w[s] * d;
        }
        total += hinge(train.labels()[i] * f);
    }
    total / n as f64
}

/// `min_b sum_i hinge(y_i (b + f_i))` by trying every breakpoint.
fn best_intercept_loss(f: &[f64], y: &[f64]) -> f64 {
    let loss = |b: f64| -> f64 {
        f.iter().zip(y).map(|(f, y)| hinge(y * (b + f))).sum::<f64>()
    };
    f.iter()
        .zip(y)
        .map(|(f, y)| loss(y - f))
        .fold(f64::INFINITY, f64::min)
}

/// Penalized objective in `w` with the intercept profiled out.
fn profiled(data: &Dataset, w: &[f64], penalty: &dyn Fn(&[f64]) -> f64) -> f64 {
    let n = data.n_samples();
    let f: Vec<f64> = (0..n)
        .map(|i| (0..w.len()).map(|j| data.features()[(i, j)] * w[j]).sum())
        .collect();
    best_intercept_loss(&f, data.labels()) / n as f64 + penalty(w)
}

/// Random orthonormal `p x p` basis.
fn random_rotation(rng: &mut ChaCha8Rng, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0)).qr().q()
}

/// Coarse-to-fine grid minimization of a convex function of `w` on
/// `[-radius, radius]^p`. Each level evaluates an 11-point grid per axis of a
/// randomly rotated box around the incumbent and shrinks the box to three grid
/// spacings. Rotations and restarts from the incumbent at smaller radii keep
/// narrow diagonal valleys from stalling the search.
fn grid_minimize(p: usize, radius: f64, f: &dyn Fn(&[f64]) -> f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6964);
    let mut center = vec![0.0; p];
    let mut best = f(&center);
    for restart in 0..4 {
        let half = radius * 0.1f64.powi(restart);
        let (c, b) = grid_descent(p, half, center, best, &mut rng, f);
        center = c;
        best = b;
    }
    best
}

fn grid_descent(
    p: usize,
    mut half: f64,
    mut center: Vec<f64>,
    mut best: f64,
    rng: &mut ChaCha8Rng,
    f: &dyn Fn(&[f64]) -> f64,
) -> (Vec<f64>, f64) {
    const POINTS: usize = 11;
    let mut idx = vec![0usize; p];
    while half > 1e-9 {
        let h = 2.0 * half / (POINTS - 1) as f64;
        let q = random_rotation(rng, p);
        let mut best_point = center.clone();
        idx.iter_mut().for_each(|k| *k = 0);
        loop {
            let offset: Vec<f64> = idx.iter().map(|&k| -half + h * k as f64).collect();
            let w: Vec<f64> = (0..p)
                .map(|j| center[j] + (0..p).map(|k| q[(j, k)] * offset[k]).sum::<f64>())
                .collect();
            let v = f(&w);
            if v < best {
                best = v;
                best_point = w;
            }
            let mut d = 0;
            while d < p {
                idx[d] += 1;
                if idx[d] < POINTS {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == p {
                break;
            }
        }
        center = best_point;
        half = 3.0 * h;
    }
    (center, best)
}

/// Minimum of the L2-penalized hinge risk by grid search. Any minimizer
/// has `|w| <= sqrt(2 / lambda)` because the objective at `w = 0` is at most 1.
pub fn grid_l2_min(data: &Dataset, lambda: f64) -> f64 {
    let radius = (2.0 / lambda).sqrt();
    let pen = move |w: &[f64]| 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    grid_minimize(data.n_features(), radius, &|w| profiled(data, w, &pen))
}

/// Minimum of the L1-penalized hinge risk; minimizers satisfy
/// `|w|_1 <= 1 / lambda`.
pub fn grid_l1_min(data: &Dataset, lambda: f64) -> f64 {
    let radius = 1.0 / lambda;
    let pen = move |w: &[f64]| lambda * w.iter().map(|v| v.abs()).sum::<f64>();
    grid_minimize(data.n_features(), radius, &|w| profiled(data, w, &pen))
}

/// Minimum of the simplex objective over all weights that are multiples of
/// `step`.
pub fn simplex_grid_min(z: &DMatrix<f64>, step: f64) -> f64 {
    let k = z.ncols();
    let m = (1.0 / step).round() as usize;
    let mut best = f64::INFINITY;
    let mut counts = vec![0usize; k];
    fn rec(z: &DMatrix<f64>, m: usize, pos: usize, left: usize, counts: &mut Vec<usize>, best: &mut f64) {
        let k = counts.len();
        if pos == k - 1 {
            counts[pos] = left;
            let w: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
            *best = best.min(simplex_objective(z, &w));
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(z, m, pos + 1, left - c, counts, best);
        }
    }
    rec(z, m, 0, m, &mut counts, &mut best);
    best
}

pub fn combine(fits: &[Coefficients], w: &WeightVector) -> Coefficients {
    let p = fits[0].dim();
    let mut out = Coefficients::zeros(p);
    for (beta, &ws) in fits.iter().zip(w.as_slice()) {
        out.intercept += ws * beta.intercept;
        for j in 0..p {
            out.weights[j] += ws * beta.weights[j];
        }
    }
    out
}

pub fn mean_hinge(data: &Dataset, beta: &Coefficients) -> f64 {
    (0..data.n_samples())
        .map(|i| hinge(data.labels()[i] * beta.decision(&data.row(i))))
        .sum::<f64>()
        / data.n_samples() as f64
}
