//! Dense bounded-variable primal simplex.
//!
//! Solves `max c'x  s.t.  A x {<=,=,>=} b,  0 <= x <= u` with a full tableau.
//! Every LP in this crate is posed in a form with few rows and many bounded
//! columns (the duals of hinge-loss problems), which is where a dense
//! tableau is cheapest. The basis inverse is recomputed from the original
//! columns every [`SimplexOptions::refactor_every`] pivots and once more at
//! termination, so the reported solution and row duals come from a fresh
//! factorization.
//!
//! Pricing is Dantzig's rule with lowest-index tie breaking; after a run of
//! degenerate pivots it switches to Bland's rule until progress resumes, so
//! the method cannot cycle and its output is a deterministic function of
//! the input.

use nalgebra::DMatrix;

use crate::error::{Result, SvmmaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Reduced-cost threshold for an improving column.
    pub optimality_tol: f64,
    /// Smallest pivot magnitude accepted by the ratio test.
    pub pivot_tol: f64,
    pub feasibility_tol: f64,
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_limit: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: 200_000,
            optimality_tol: 1e-10,
            pivot_tol: 1e-9,
            feasibility_tol: 1e-9,
            refactor_every: 64,
            degenerate_limit: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Vec<f64>>,
    relations: Vec<Relation>,
    rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Structural variable values.
    pub x: Vec<f64>,
    /// One multiplier per constraint, in insertion order. For a `Le` row of
    /// a maximization problem the multiplier is nonnegative.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// False when the iteration cap stopped the solve early; `x` is then the
    /// last feasible vertex visited.
    pub optimal: bool,
}

impl LinearProgram {
    /// A maximization problem over `objective.len()` variables with lower
    /// bounds 0 and no upper bounds.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            upper: vec![f64::INFINITY; n],
            rows: Vec::new(),
            relations: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_upper_bound(&mut self, var: usize, ub: f64) {
        assert!(ub >= 0.0, "upper bound must be nonnegative");
        self.upper[var] = ub;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.n_vars(), "constraint width");
        self.rows.push(coeffs);
        self.relations.push(relation);
        self.rhs.push(rhs);
    }

    pub fn solve(&self, opts: &SimplexOptions) -> Result<LpSolution> {
        if self.rows.is_empty() {
            return self.solve_unconstrained();
        }
        let mut tab = Tableau::new(self, opts);
        if tab.n_artificial > 0 {
            let phase1: Vec<f64> = (0..tab.n_cols)
                .map(|j| if j >= tab.first_artificial { -1.0 } else { 0.0 })
                .collect();
            tab.set_costs(phase1);
            tab.run()?;
            let infeasibility = -tab.objective_value();
            let scale = 1.0 + self.rhs.iter().map(|b| b.abs()).fold(0.0, f64::max);
            if infeasibility > opts.feasibility_tol * scale {
                return Err(SvmmaError::Infeasible);
            }
            tab.fix_artificials();
        }
        let mut costs = self.objective.clone();
        costs.resize(tab.n_cols, 0.0);
        tab.set_costs(costs);
        let optimal = tab.run()?;
        Ok(tab.solution(self, optimal))
    }

    fn solve_unconstrained(&self) -> Result<LpSolution> {
        let mut x = Vec::with_capacity(self.n_vars());
        for (&c, &u) in self.objective.iter().zip(&self.upper) {
            if c > 0.0 {
                if u.is_infinite() {
                    return Err(SvmmaError::Unbounded);
                }
                x.push(u);
            } else {
                x.push(0.0);
            }
        }
        let objective = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution {
            x,
            duals: Vec::new(),
            objective,
            iterations: 0,
            optimal: true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau<'a> {
    opts: &'a SimplexOptions,
    m: usize,
    n_cols: usize,
    first_artificial: usize,
    n_artificial: usize,
    /// Original standard-form matrix, row-major `m x n_cols`.
    a: Vec<f64>,
    b: Vec<f64>,
    upper: Vec<f64>,
    costs: Vec<f64>,
    row_sign: Vec<f64>,
    /// Current `B^-1 A`, row-major.
    t: Vec<f64>,
    /// Values of the basic variables, by row.
    beta: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    reduced: Vec<f64>,
    duals: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

impl<'a> Tableau<'a> {
    fn new(lp: &LinearProgram, opts: &'a SimplexOptions) -> Self {
        let m = lp.rows.len();
        let n = lp.n_vars();
        // rows with negative rhs are negated so every rhs is nonnegative
        let mut relations = lp.relations.clone();
        let mut row_sign = vec![1.0; m];
        for r in 0..m {
            if lp.rhs[r] < 0.0 {
                row_sign[r] = -1.0;
                relations[r] = match relations[r] {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let n_slack = relations.iter().filter(|&&r| r != Relation::Eq).count();
        let n_artificial = relations.iter().filter(|&&r| r != Relation::Le).count();
        let first_artificial = n + n_slack;
        let n_cols = first_artificial + n_artificial;

        let mut a = vec![0.0; m * n_cols];
        let mut b = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut slack = n;
        let mut art = first_artificial;
        for r in 0..m {
            let s = row_sign[r];
            let row = &mut a[r * n_cols..(r + 1) * n_cols];
            for (dst, &src) in row[..n].iter_mut().zip(&lp.rows[r]) {
                *dst = s * src;
            }
            b[r] = s * lp.rhs[r];
            match relations[r] {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis[r] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis[r] = art;
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis[r] = art;
                    art += 1;
                }
            }
        }
        let mut upper = lp.upper.clone();
        upper.resize(n_cols, f64::INFINITY);
        let mut status = vec![Status::AtLower; n_cols];
        for &j in &basis {
            status[j] = Status::Basic;
        }
        Tableau {
            opts,
            m,
            n_cols,
            first_artificial,
            n_artificial,
            t: a.clone(),
            beta: b.clone(),
            a,
            b,
            upper,
            costs: vec![0.0; n_cols],
            row_sign,
            basis,
            status,
            reduced: vec![0.0; n_cols],
            duals: vec![0.0; m],
            iterations: 0,
            since_refactor: 0,
        }
    }

    fn set_costs(&mut self, costs: Vec<f64>) {
        self.costs = costs;
        self.refactor().expect("basis is nonsingular when costs change");
    }

    /// Artificial variables may not leave zero once phase one is done.
    fn fix_artificials(&mut self) {
        for j in self.first_artificial..self.n_cols {
            self.upper[j] = 0.0;
            if self.status[j] == Status::AtUpper {
                self.status[j] = Status::AtLower;
            }
        }
    }

    fn value_of_nonbasic(&self, j: usize) -> f64 {
        match self.status[j] {
            Status::AtUpper => self.upper[j],
            _ => 0.0,
        }
    }

    fn objective_value(&self) -> f64 {
        let mut v: f64 = (0..self.n_cols)
            .filter(|&j| self.status[j] == Status::AtUpper)
            .map(|j| self.costs[j] * self.upper[j])
            .sum();
        for (r, &j) in self.basis.iter().enumerate() {
            v += self.costs[j] * self.beta[r];
        }
        v
    }

    /// Rebuilds `B^-1 A`, basic values, duals and reduced costs from the
    /// original data.
    fn refactor(&mut self) -> Result<()> {
        let (m, nc) = (self.m, self.n_cols);
        let basis_mat = DMatrix::from_fn(m, m, |i, k| self.a[i * nc + self.basis[k]]);
        let lu = basis_mat.lu();
        let inv = lu.try_inverse().ok_or(SvmmaError::SingularBasis)?;

        let a_mat = DMatrix::from_row_slice(m, nc, &self.a);
        let t = &inv * &a_mat;
        for i in 0..m {
            for j in 0..nc {
                self.t[i * nc + j] = t[(i, j)];
            }
        }

        let mut rhs = nalgebra::DVector::from_column_slice(&self.b);
        for j in 0..nc {
            if self.status[j] == Status::AtUpper {
                let u = self.upper[j];
                for i in 0..m {
                    rhs[i] -= self.a[i * nc + j] * u;
                }
            }
        }
        let beta = &inv * rhs;
        self.beta.copy_from_slice(beta.as_slice());

        let cb = nalgebra::DVector::from_fn(m, |k, _| self.costs[self.basis[k]]);
        let duals = inv.transpose() * cb;
        self.duals.copy_from_slice(duals.as_slice());
        for j in 0..nc {
            let mut d = self.costs[j];
            for i in 0..m {
                d -= self.duals[i] * self.a[i * nc + j];
            }
            self.reduced[j] = d;
        }
        for &j in &self.basis {
            self.reduced[j] = 0.0;
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n_cols {
            let d = self.reduced[j];
            let score = match self.status[j] {
                Status::Basic => continue,
                Status::AtLower if d > tol && self.upper[j] > 0.0 => d,
                Status::AtUpper if d < -tol => -d,
                _ => continue,
            };
            if bland {
                return Some(j);
            }
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Runs the simplex loop with the current costs. Returns `Ok(false)` if
    /// the iteration cap was reached.
    fn run(&mut self) -> Result<bool> {
        let nc = self.n_cols;
        let mut degenerate_run = 0usize;
        loop {
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            let bland = degenerate_run >= self.opts.degenerate_limit;
            let Some(j) = self.entering(bland) else {
                if self.since_refactor == 0 {
                    return Ok(true);
                }
                self.refactor()?;
                if self.entering(bland).is_none() {
                    return Ok(true);
                }
                continue;
            };
            if self.iterations >= self.opts.max_iterations {
                self.refactor()?;
                return Ok(false);
            }
            self.iterations += 1;

            let dir = if self.status[j] == Status::AtLower {
                1.0
            } else {
                -1.0
            };
            // ratio test: (step, row, leaving goes to upper)
            let mut step = f64::INFINITY;
            let mut leave: Option<(usize, bool)> = None;
            for r in 0..self.m {
                let alpha = dir * self.t[r * nc + j];
                let bvar = self.basis[r];
                let (limit, to_upper) = if alpha > self.opts.pivot_tol {
                    (self.beta[r].max(0.0) / alpha, false)
                } else if alpha < -self.opts.pivot_tol && self.upper[bvar].is_finite() {
                    ((self.upper[bvar] - self.beta[r]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((lr, _)) => {
                        limit < step || (limit == step && bvar < self.basis[lr])
                    }
                };
                if better {
                    step = limit;
                    leave = Some((r, to_upper));
                }
            }
            let flip = self.upper[j];
            if flip.is_infinite() && leave.is_none() {
                return Err(SvmmaError::Unbounded);
            }
            if step <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            if flip <= step {
                for r in 0..self.m {
                    self.beta[r] -= flip * dir * self.t[r * nc + j];
                }
                self.status[j] = if dir > 0.0 {
                    Status::AtUpper
                } else {
                    Status::AtLower
                };
                continue;
            }

            let (r, to_upper) = leave.expect("bounded step has a leaving row");
            let entering_value = self.value_of_nonbasic(j) + dir * step;
            for i in 0..self.m {
                self.beta[i] -= step * dir * self.t[i * nc + j];
            }
            let leaving = self.basis[r];
            self.status[leaving] = if to_upper {
                Status::AtUpper
            } else {
                Status::AtLower
            };
            self.pivot(r, j);
            self.basis[r] = j;
            self.status[j] = Status::Basic;
            self.beta[r] = entering_value;
            self.since_refactor += 1;
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.n_cols;
        let piv = self.t[r * nc + j];
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        prow[j] = 1.0;
        for row in before.chunks_exact_mut(nc).chain(after.chunks_exact_mut(nc)) {
            let f = row[j];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[j] = 0.0;
            }
        }
        let f = self.reduced[j];
        if f != 0.0 {
            for (v, &pv) in self.reduced.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            self.reduced[j] = 0.0;
        }
    }

    fn solution(&self, lp: &LinearProgram, optimal: bool) -> LpSolution {
        let n = lp.n_vars();
        let mut x: Vec<f64> = (0..n).map(|j| self.value_of_nonbasic(j)).collect();
        for (r, &j) in self.basis.iter().enumerate() {
            if j < n {
                // clip round-off outside the bounds
                x[j] = self.beta[r].clamp(0.0, self.upper[j]);
            }
        }
        let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        let duals = self
            .duals
            .iter()
            .zip(&self.row_sign)
            .map(|(d, s)| d * s)
            .collect();
        LpSolution {
            x,
            duals,
            objective,
            iterations: self.iterations,
            optimal,
        }
    }
}
