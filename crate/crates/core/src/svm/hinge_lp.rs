use crate::data::Dataset;
use crate::error::Result;
use crate::lp::{LinearProgram, Relation, SimplexOptions};

use super::{mean_hinge, optimal_intercept, Coefficients};

pub(crate) struct HingeLpFit {
    pub coefficients: Coefficients,
    /// `(1/n) sum c_i hinge + lambda |w|_1` at the returned coefficients.
    pub primal: f64,
    /// Dual objective at the simplex's final basis.
    pub dual: f64,
    pub iterations: usize,
    pub optimal: bool,
}

/// Minimizes `sum_i u_i hinge(y_i (b + x_i'w)) + lambda |w|_1` through its
/// dual linear program
///
/// ```text
/// max sum_i a_i  s.t.  sum_i y_i a_i = 0,  |sum_i y_i x_ij a_i| <= lambda,
///                      0 <= a_i <= u_i
/// ```
///
/// which has `2p + 1` rows regardless of `n`. The primal intercept is the
/// multiplier of the equality row and `w_j` is the difference of the two
/// multipliers of feature `j`'s rows. `upper[i]` is `c_i / n`.
pub(crate) fn solve_hinge_lp(data: &Dataset, upper: &[f64], lambda: f64) -> Result<HingeLpFit> {
    let (n, p) = (data.n_samples(), data.n_features());
    let x = data.features();
    let y = data.labels();

    let mut lp = LinearProgram::maximize(vec![1.0; n]);
    for (i, &u) in upper.iter().enumerate() {
        lp.set_upper_bound(i, u);
    }
    lp.add_constraint(y.to_vec(), Relation::Eq, 0.0);
    for j in 0..p {
        let col: Vec<f64> = (0..n).map(|i| y[i] * x[(i, j)]).collect();
        let neg: Vec<f64> = col.iter().map(|v| -v).collect();
        lp.add_constraint(col, Relation::Le, lambda);
        lp.add_constraint(neg, Relation::Le, lambda);
    }
    let sol = lp.solve(&SimplexOptions::default())?;

    let weights: Vec<f64> = (0..p)
        .map(|j| sol.duals[1 + 2 * j] - sol.duals[2 + 2 * j])
        .collect();
    let mut coefficients = Coefficients::new(sol.duals[0], weights);
    let penalty = lambda * coefficients.weights.iter().map(|w| w.abs()).sum::<f64>();
    let c: Vec<f64> = upper.iter().map(|u| u * n as f64).collect();

    let f = coefficients.decision_values(data)?;
    let primal_lp = mean_hinge(&f, y, &c) + penalty;
    let f0: Vec<f64> = f.iter().map(|v| v - coefficients.intercept).collect();
    let b = optimal_intercept(&f0, y, &c);
    let shifted: Vec<f64> = f0.iter().map(|v| v + b).collect();
    let primal_refit = mean_hinge(&shifted, y, &c) + penalty;
    let primal = if primal_refit < primal_lp {
        coefficients.intercept = b;
        primal_refit
    } else {
        primal_lp
    };

    Ok(HingeLpFit {
        coefficients,
        primal,
        dual: sol.objective,
        iterations: sol.iterations,
        optimal: sol.optimal,
    })
}
