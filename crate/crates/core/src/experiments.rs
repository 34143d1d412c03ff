//! Experiment protocols: simulated studies, repeated real-data splits and
//! learning curves over the number of candidates, with CSV and SVG reports.
//!
//! Every replication `d` draws all of its randomness from
//! `derive_seed(master, d)`, so a replication gives the same rows whether it
//! runs alone or inside a batch, on any number of threads.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    ic_scores, select_by_ic, smoothed_ic_weights, uniform_weights, AdaBoostEnsemble,
    BaggingEnsemble, BoostStatus, EnsembleConfig, EnsembleMethod, IcKind,
};
use crate::candidates::{average_coefficients, build_candidates, CandidateSet, ModelSpec};
use crate::cv::{
    build_cv_matrix, fit_fold_models, make_folds, refit_full, sign_label, solve_weights,
    WeightVector,
};
use crate::data::{
    apply_standardization, generate, load_csv, split, standardize, Dataset, Dgp, DgpConfig,
    LabelColumn, SplitSpec,
};
use crate::error::{Result, SvmmaError};
use crate::metrics::{error_rate, mean, standard_error, Nhl, TestOracle};
use crate::rng::{derive_seed, tag};
use crate::screening::{screen_features, FeatureOrdering, ScreeningConfig};
use crate::svm::Coefficients;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SVMMA")]
    Svmma,
    #[serde(rename = "SVMICL")]
    Svmicl,
    #[serde(rename = "SVMICH")]
    Svmich,
    #[serde(rename = "SCL")]
    Scl,
    #[serde(rename = "SCH")]
    Sch,
    #[serde(rename = "UNIF")]
    Unif,
    #[serde(rename = "BAG")]
    Bag,
    #[serde(rename = "ADA")]
    Ada,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Svmma,
        Method::Svmicl,
        Method::Svmich,
        Method::Scl,
        Method::Sch,
        Method::Unif,
        Method::Bag,
        Method::Ada,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Svmma => "SVMMA",
            Method::Svmicl => "SVMICL",
            Method::Svmich => "SVMICH",
            Method::Scl => "SCL",
            Method::Sch => "SCH",
            Method::Unif => "UNIF",
            Method::Bag => "BAG",
            Method::Ada => "ADA",
        }
    }

    /// Whether the method is a weight vector over the candidates, and so has
    /// a normalized hinge loss.
    pub fn is_weighting(self) -> bool {
        !matches!(self, Method::Bag | Method::Ada)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = SvmmaError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| SvmmaError::invalid(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Realdata,
    LearningCurve,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Dgp1,
    Dgp2,
    Csv { path: PathBuf, label: LabelColumn },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Every candidate misses one signal covariate.
    S1,
    /// Nested candidates straight from the screening order.
    S2,
    None,
}

pub const DEFAULT_G_GRID: [f64; 5] = [0.4, 0.5, 0.6, 0.7, 0.8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub source: Source,
    pub scenario: Scenario,
    /// Training size when no `n_grid` is given.
    pub n: usize,
    /// Training sizes swept in simulate mode.
    pub n_grid: Option<Vec<usize>>,
    pub p: usize,
    pub q: usize,
    pub n_test: usize,
    pub replications: usize,
    pub folds: usize,
    /// Number of candidate models.
    pub candidates: usize,
    pub screening: ScreeningConfig,
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Training fractions swept in realdata mode.
    pub g_grid: Option<Vec<f64>>,
    /// Training fraction for CSV data outside realdata mode.
    pub train_fraction: f64,
    /// Candidate counts swept in learning-curve mode.
    pub sn_grid: Option<Vec<usize>>,
    /// Ensemble rounds; defaults to the number of candidates.
    pub rounds: Option<usize>,
    pub tolerance: f64,
    pub shuffle_folds: bool,
    /// Fill `wall_time_ms`. Off by default so reruns are byte-identical.
    pub record_timing: bool,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Simulate,
            source: Source::Dgp1,
            scenario: Scenario::S2,
            n: 200,
            n_grid: Some(vec![100, 200, 400]),
            p: 50,
            q: 4,
            n_test: 2000,
            replications: 50,
            folds: 5,
            candidates: 20,
            screening: ScreeningConfig::default(),
            methods: Method::ALL.to_vec(),
            seed: 1,
            g_grid: None,
            train_fraction: 0.5,
            sn_grid: None,
            rounds: None,
            tolerance: 1e-6,
            shuffle_folds: false,
            record_timing: false,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SvmmaError::invalid(m));
        if self.replications == 0 {
            return bad("at least one replication is required".into());
        }
        if self.folds < 2 {
            return bad(format!("fold count {} must be at least 2", self.folds));
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        if self.rounds == Some(0) {
            return bad("ensemble rounds must be positive".into());
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive".into());
        }
        self.screening.validate()?;
        match (&self.mode, &self.source) {
            (Mode::Simulate, Source::Csv { .. }) => {
                return bad("simulate mode needs a generated source".into())
            }
            (Mode::Realdata, Source::Dgp1 | Source::Dgp2) => {
                return bad("realdata mode needs a CSV source".into())
            }
            _ => {}
        }
        if let Some(g) = &self.g_grid {
            if g.is_empty() || g.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                return bad("g grid values must lie in (0, 1)".into());
            }
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train fraction must lie in (0, 1)".into());
        }
        if matches!(self.sn_grid.as_deref(), Some([])) {
            return bad("candidate grid is empty".into());
        }
        if self.mode == Mode::LearningCurve && self.sn_grid.is_none() {
            return bad("learning-curve mode needs a candidate grid".into());
        }
        if let Some(ns) = &self.n_grid {
            if ns.is_empty() {
                return bad("n grid is empty".into());
            }
        }
        if !matches!(self.source, Source::Csv { .. }) {
            if self.q == 0 || self.q > self.p {
                return bad(format!("q={} must satisfy 1 <= q <= p={}", self.q, self.p));
            }
            if self.n_test == 0 {
                return bad("test size must be positive".into());
            }
            let smallest_n = self.training_sizes().into_iter().min().unwrap_or(0);
            if smallest_n < self.folds {
                return bad(format!("n={smallest_n} is smaller than the fold count"));
            }
            self.check_candidates(self.p)?;
        }
        Ok(())
    }

    fn candidate_counts(&self) -> Vec<usize> {
        match (self.mode, &self.sn_grid) {
            (Mode::LearningCurve, Some(g)) => g.clone(),
            _ => vec![self.candidates],
        }
    }

    fn check_candidates(&self, p: usize) -> Result<()> {
        let cap = if self.scenario == Scenario::S1 { p.saturating_sub(1) } else { p };
        for s in self.candidate_counts() {
            if s == 0 || s > cap {
                return Err(SvmmaError::invalid(format!(
                    "candidate count {s} must lie in 1..={cap} for p={p}"
                )));
            }
        }
        Ok(())
    }

    fn training_sizes(&self) -> Vec<usize> {
        match (&self.mode, &self.n_grid) {
            (Mode::Simulate, Some(ns)) => ns.clone(),
            _ => vec![self.n],
        }
    }

    fn dgp(&self) -> Option<Dgp> {
        match self.source {
            Source::Dgp1 => Some(Dgp::Dgp1),
            Source::Dgp2 => Some(Dgp::Dgp2),
            Source::Csv { .. } => None,
        }
    }

    fn mode_label(&self) -> &'static str {
        match self.mode {
            Mode::Simulate => "simulate",
            Mode::Realdata => "realdata",
            Mode::LearningCurve => "learning-curve-test",
        }
    }
}

pub const TRAIN_CURVE_MODE: &str = "learning-curve-train";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub mode: String,
    pub sweep_value: f64,
    pub replication: usize,
    pub nhl: Option<f64>,
    pub er: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub seed: u64,
    pub status: String,
}

pub const STATUS_OK: &str = "ok";
pub const STATUS_SEPARABLE: &str = "separable";
pub const STATUS_NONCONVERGED: &str = "nonconverged";
pub const STATUS_DEGENERATE: &str = "degenerate";
pub const STATUS_STOPPED_EARLY: &str = "stopped-early";

/// Data shared by all replications.
struct Context<'a> {
    cfg: &'a ExperimentConfig,
    population: Option<Dataset>,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let population = match &cfg.source {
            Source::Csv { path, label } => {
                let data = load_csv(path, label)?;
                cfg.check_candidates(data.n_features())?;
                Some(data)
            }
            _ => None,
        };
        Ok(Context { cfg, population })
    }

    fn simulate(&self, n: usize, seed_d: u64) -> Result<(Dataset, Dataset)> {
        let cfg = self.cfg;
        let which = cfg.dgp().expect("generated source");
        let train = generate(&DgpConfig {
            which,
            n,
            p: cfg.p,
            q: cfg.q,
            seed: derive_seed(seed_d, tag::TRAIN_DATA),
        })?;
        let test = generate(&DgpConfig {
            which,
            n: cfg.n_test,
            p: cfg.p,
            q: cfg.q,
            seed: derive_seed(seed_d, tag::TEST_DATA),
        })?;
        Ok((train, test))
    }

    fn split(&self, g: f64, seed_d: u64) -> Result<(Dataset, Dataset)> {
        let data = self.population.as_ref().expect("CSV source");
        let (train, test) = split(
            data,
            &SplitSpec {
                train_fraction: g,
                seed: derive_seed(seed_d, tag::SPLIT),
            },
        )?;
        if train.n_samples() < self.cfg.folds {
            return Err(SvmmaError::invalid(format!(
                "{} training rows cannot fill {} folds",
                train.n_samples(),
                self.cfg.folds
            )));
        }
        let (train, params) = standardize(&train);
        let test = apply_standardization(&test, &params)?;
        Ok((train, test))
    }

    fn data_for(&self, n: usize, g: f64, seed_d: u64) -> Result<(Dataset, Dataset)> {
        if self.population.is_some() {
            self.split(g, seed_d)
        } else {
            self.simulate(n, seed_d)
        }
    }

    fn replication(&self, d: usize) -> Vec<ResultRow> {
        let cfg = self.cfg;
        let seed_d = derive_seed(cfg.seed, d as u64);
        log::debug!("replication {d} (seed {seed_d})");
        let point = Point {
            ctx: self,
            d,
            seed_d,
        };
        let mut rows = Vec::new();
        match cfg.mode {
            Mode::Simulate => {
                for n in cfg.training_sizes() {
                    rows.extend(point.run(n as f64, cfg.candidates, || {
                        let (train, test) = self.data_for(n, cfg.train_fraction, seed_d)?;
                        let ordering = screen(&train, &cfg.screening)?;
                        Ok((train, test, ordering))
                    }));
                }
            }
            Mode::Realdata => {
                let grid = cfg.g_grid.clone().unwrap_or(DEFAULT_G_GRID.to_vec());
                for g in grid {
                    rows.extend(point.run(g, cfg.candidates, || {
                        let (train, test) = self.data_for(cfg.n, g, seed_d)?;
                        let ordering = screen(&train, &cfg.screening)?;
                        Ok((train, test, ordering))
                    }));
                }
            }
            Mode::LearningCurve => {
                let shared = self
                    .data_for(cfg.n, cfg.train_fraction, seed_d)
                    .and_then(|(train, test)| {
                        let ordering = screen(&train, &cfg.screening)?;
                        Ok((train, test, ordering))
                    });
                for s_n in cfg.candidate_counts() {
                    rows.extend(point.run(s_n as f64, s_n, || match &shared {
                        Ok((a, b, c)) => Ok((a.clone(), b.clone(), c.clone())),
                        Err(e) => Err(SvmmaError::invalid(e.to_string())),
                    }));
                }
            }
        }
        rows
    }
}

/// One replication at one sweep value.
struct Point<'c, 'a> {
    ctx: &'c Context<'a>,
    d: usize,
    seed_d: u64,
}

type Prepared = (Dataset, Dataset, FeatureOrdering);

impl Point<'_, '_> {
    fn run(&self, sweep: f64, s_n: usize, prepare: impl FnOnce() -> Result<Prepared>) -> Vec<ResultRow> {
        let cfg = self.ctx.cfg;
        let outcome = prepare().and_then(|(train, test, ordering)| {
            self.evaluate(sweep, s_n, &train, &test, &ordering)
        });
        match outcome {
            Ok(rows) => rows,
            Err(e) => {
                let status = format!("error: {e}");
                let mut methods = cfg.methods.clone();
                methods.sort();
                methods.dedup();
                methods
                    .into_iter()
                    .map(|m| self.row(m, cfg.mode_label(), sweep, None, None, None, &status))
                    .collect()
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn row(
        &self,
        method: Method,
        mode: &str,
        sweep: f64,
        nhl: Option<f64>,
        er: Option<f64>,
        ms: Option<f64>,
        status: &str,
    ) -> ResultRow {
        ResultRow {
            method,
            mode: mode.to_string(),
            sweep_value: sweep,
            replication: self.d,
            nhl,
            er,
            wall_time_ms: if self.ctx.cfg.record_timing { ms } else { None },
            seed: self.seed_d,
            status: status.to_string(),
        }
    }

    fn evaluate(
        &self,
        sweep: f64,
        s_n: usize,
        train: &Dataset,
        test: &Dataset,
        ordering: &FeatureOrdering,
    ) -> Result<Vec<ResultRow>> {
        let cfg = self.ctx.cfg;
        let cands = match (cfg.scenario, cfg.dgp()) {
            (Scenario::S1, Some(_)) => s1_candidates(ordering, s_n, cfg.q)?,
            _ => build_candidates(ordering, s_n)?,
        };
        let (full_fits, reports) = refit_full(train, &cands, cfg.tolerance)?;
        let refit_converged = reports.iter().all(|r| r.converged);
        let mut methods = cfg.methods.clone();
        methods.sort();
        methods.dedup();
        let oracle = methods
            .iter()
            .any(|m| m.is_weighting())
            .then(|| TestOracle::new(test, &full_fits))
            .transpose()?;
        let curve = cfg.mode == Mode::LearningCurve;
        let mode = cfg.mode_label();

        let mut rows = Vec::new();
        for method in methods {
            let start = Instant::now();
            if method.is_weighting() {
                let (w, converged) = self.weights(method, train, &cands, &full_fits)?;
                let elapsed = ms_since(start);
                let combined = average_coefficients(&full_fits, &w)?;
                let nhl = oracle.as_ref().expect("built for weighting methods").nhl(&w)?;
                let status = match nhl {
                    Nhl::Separable => STATUS_SEPARABLE,
                    _ if !(converged && refit_converged) => STATUS_NONCONVERGED,
                    _ => STATUS_OK,
                };
                let er = error_rate(&predict_all(&combined, test), test.labels())?;
                rows.push(self.row(method, mode, sweep, nhl.value(), Some(er), Some(elapsed), status));
                if curve {
                    let er = error_rate(&predict_all(&combined, train), train.labels())?;
                    rows.push(self.row(method, TRAIN_CURVE_MODE, sweep, None, Some(er), None, status));
                }
            } else {
                let rounds = cfg.rounds.unwrap_or(s_n);
                let (predictor, status): (Box<dyn Fn(&[f64]) -> f64>, &str) = match method {
                    Method::Bag => {
                        let e = BaggingEnsemble::fit(
                            train,
                            &cands,
                            &EnsembleConfig {
                                tolerance: cfg.tolerance,
                                ..EnsembleConfig::new(
                                    EnsembleMethod::Bag,
                                    rounds,
                                    derive_seed(self.seed_d, tag::BAGGING),
                                )
                            },
                        )?;
                        (Box::new(move |x| e.predict(x)), STATUS_OK)
                    }
                    _ => {
                        let e = AdaBoostEnsemble::fit(
                            train,
                            &cands,
                            &EnsembleConfig {
                                tolerance: cfg.tolerance,
                                ..EnsembleConfig::new(
                                    EnsembleMethod::Ada,
                                    rounds,
                                    derive_seed(self.seed_d, tag::BOOSTING),
                                )
                            },
                        )?;
                        let status = match e.status {
                            BoostStatus::Completed => STATUS_OK,
                            BoostStatus::StoppedEarly { .. } => STATUS_STOPPED_EARLY,
                            BoostStatus::Degenerate => STATUS_DEGENERATE,
                        };
                        (Box::new(move |x| e.predict(x)), status)
                    }
                };
                let elapsed = ms_since(start);
                let labels = |data: &Dataset| -> Vec<f64> {
                    (0..data.n_samples()).map(|i| predictor(&data.row(i))).collect()
                };
                let er = error_rate(&labels(test), test.labels())?;
                rows.push(self.row(method, mode, sweep, None, Some(er), Some(elapsed), status));
                if curve {
                    let er = error_rate(&labels(train), train.labels())?;
                    rows.push(self.row(method, TRAIN_CURVE_MODE, sweep, None, Some(er), None, status));
                }
            }
        }
        Ok(rows)
    }

    /// Weight vector of a weighting method and whether its own fits
    /// converged.
    fn weights(
        &self,
        method: Method,
        train: &Dataset,
        cands: &CandidateSet,
        full_fits: &[Coefficients],
    ) -> Result<(WeightVector, bool)> {
        let cfg = self.ctx.cfg;
        let n = train.n_samples();
        Ok(match method {
            Method::Svmma => {
                let shuffle = cfg
                    .shuffle_folds
                    .then(|| derive_seed(self.seed_d, tag::FOLDS));
                let plan = make_folds(n, cfg.folds, shuffle)?;
                let fits = fit_fold_models(train, cands, &plan, cfg.tolerance)?;
                let z = build_cv_matrix(train, cands, &plan, &fits)?;
                (solve_weights(&z, cfg.tolerance)?.0, fits.all_converged())
            }
            Method::Svmicl => (select_by_ic(&ic_scores(train, full_fits, cands, IcKind::Svmicl)?), true),
            Method::Svmich => (select_by_ic(&ic_scores(train, full_fits, cands, IcKind::Svmich)?), true),
            Method::Scl => (
                smoothed_ic_weights(&ic_scores(train, full_fits, cands, IcKind::Svmicl)?, n),
                true,
            ),
            Method::Sch => (
                smoothed_ic_weights(&ic_scores(train, full_fits, cands, IcKind::Svmich)?, n),
                true,
            ),
            Method::Unif => (uniform_weights(cands.len())?, true),
            Method::Bag | Method::Ada => unreachable!("not a weighting method"),
        })
    }
}

fn screen(train: &Dataset, cfg: &ScreeningConfig) -> Result<FeatureOrdering> {
    let ordering = screen_features(train, cfg)?;
    for w in ordering.warnings() {
        log::warn!("screening: {w}");
    }
    Ok(ordering)
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn predict_all(beta: &Coefficients, data: &Dataset) -> Vec<f64> {
    beta.decision_values(data)
        .expect("dimensions checked by the caller")
        .into_iter()
        .map(sign_label)
        .collect()
}

/// Candidate `s` (1-based) is the first `s` screened features once signal
/// covariate `(s - 1) mod q` is removed from the ordering, so every model
/// misses a signal covariate and still has `s` covariates.
pub fn s1_candidates(ordering: &FeatureOrdering, s_n: usize, q: usize) -> Result<CandidateSet> {
    let p = ordering.n_features();
    if q == 0 || q > p {
        return Err(SvmmaError::invalid(format!("q={q} must lie in 1..={p}")));
    }
    if s_n == 0 || s_n >= p {
        return Err(SvmmaError::invalid(format!(
            "S1 needs 1 <= candidates < p, got {s_n} with p={p}"
        )));
    }
    let features = ordering.features();
    let models = (1..=s_n)
        .map(|s| {
            let dropped = (s - 1) % q;
            let kept: Vec<usize> = features.iter().copied().filter(|&j| j != dropped).take(s).collect();
            ModelSpec::new(kept, p)
        })
        .collect::<Result<Vec<_>>>()?;
    for spec in &models {
        assert!(
            (0..q).any(|j| !spec.contains(j)),
            "every S1 candidate must omit a signal covariate"
        );
    }
    CandidateSet::from_models(models, p)
}

/// All rows of one replication, in sweep order then method order.
pub fn run_replication(cfg: &ExperimentConfig, d: usize) -> Result<Vec<ResultRow>> {
    Ok(Context::new(cfg)?.replication(d))
}

/// Runs every replication, optionally on a capped thread pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let ctx = Context::new(cfg)?;
    let run = || -> Vec<ResultRow> {
        let per_rep: Vec<Vec<ResultRow>> = (0..cfg.replications)
            .into_par_iter()
            .map(|d| ctx.replication(d))
            .collect();
        per_rep.into_iter().flatten().collect()
    };
    match cfg.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| SvmmaError::invalid(e.to_string()))?;
            Ok(pool.install(run))
        }
        None => Ok(run()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub mode: String,
    pub sweep_value: f64,
    pub metric: String,
    pub mean: Option<f64>,
    pub se: Option<f64>,
    pub count: usize,
    /// Rows without a value for this metric.
    pub excluded: usize,
}

/// Mean and standard error of each metric per (mode, method, sweep value).
pub fn aggregate(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(&str, Method, f64)> = rows
        .iter()
        .map(|r| (r.mode.as_str(), r.method, r.sweep_value))
        .collect();
    keys.sort_by(|a, b| a.0.cmp(b.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    keys.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1 && a.2.total_cmp(&b.2).is_eq());
    let mut out = Vec::new();
    for (mode, method, sweep) in keys {
        let group: Vec<&ResultRow> = rows
            .iter()
            .filter(|r| r.mode == mode && r.method == method && r.sweep_value.total_cmp(&sweep).is_eq())
            .collect();
        for (metric, get) in [
            ("nhl", (|r: &ResultRow| r.nhl) as fn(&ResultRow) -> Option<f64>),
            ("er", |r: &ResultRow| r.er),
        ] {
            let values: Vec<f64> = group.iter().filter_map(|r| get(r)).collect();
            out.push(SummaryRow {
                method,
                mode: mode.to_string(),
                sweep_value: sweep,
                metric: metric.to_string(),
                mean: mean(&values),
                se: standard_error(&values),
                count: values.len(),
                excluded: group.len() - values.len(),
            });
        }
    }
    out
}

pub const RESULTS_HEADER: [&str; 9] = [
    "method",
    "mode",
    "sweep_value",
    "replication",
    "nhl",
    "er",
    "wall_time_ms",
    "seed",
    "status",
];

const SUMMARY_HEADER: [&str; 8] = [
    "method", "mode", "sweep_value", "metric", "mean", "se", "count", "excluded",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: impl fmt::Display) -> SvmmaError {
    SvmmaError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Files written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub charts: Vec<PathBuf>,
}

/// Writes `results.csv`, `summary.csv` and one line chart per metric that
/// has at least one value.
pub fn emit_report(rows: &[ResultRow], out_dir: impl AsRef<Path>) -> Result<ReportFiles> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;

    let results = dir.join("results.csv");
    let mut w = csv_writer(&results)?;
    w.write_record(RESULTS_HEADER).map_err(|e| csv_error(&results, e))?;
    for r in rows {
        w.write_record([
            r.method.name().to_string(),
            r.mode.clone(),
            r.sweep_value.to_string(),
            r.replication.to_string(),
            opt(r.nhl),
            opt(r.er),
            opt(r.wall_time_ms),
            r.seed.to_string(),
            r.status.clone(),
        ])
        .map_err(|e| csv_error(&results, e))?;
    }
    w.flush()?;

    let summary_rows = aggregate(rows);
    let summary = dir.join("summary.csv");
    let mut w = csv_writer(&summary)?;
    w.write_record(SUMMARY_HEADER).map_err(|e| csv_error(&summary, e))?;
    for s in &summary_rows {
        w.write_record([
            s.method.name().to_string(),
            s.mode.clone(),
            s.sweep_value.to_string(),
            s.metric.clone(),
            opt(s.mean),
            opt(s.se),
            s.count.to_string(),
            s.excluded.to_string(),
        ])
        .map_err(|e| csv_error(&summary, e))?;
    }
    w.flush()?;

    let mut charts = Vec::new();
    for metric in ["nhl", "er"] {
        let series = chart_series(&summary_rows, metric);
        if series.is_empty() {
            continue;
        }
        let path = dir.join(format!("{metric}.svg"));
        fs::write(&path, line_chart(&metric.to_uppercase(), &series))?;
        charts.push(path);
    }
    Ok(ReportFiles {
        results,
        summary,
        charts,
    })
}

/// One polyline: a label and its points sorted by x.
pub type Series = (String, Vec<(f64, f64)>);

fn chart_series(summary: &[SummaryRow], metric: &str) -> Vec<Series> {
    let modes: Vec<&str> = {
        let mut m: Vec<&str> = summary.iter().map(|s| s.mode.as_str()).collect();
        m.dedup();
        m
    };
    let mut out: Vec<Series> = Vec::new();
    for s in summary.iter().filter(|s| s.metric == metric) {
        let Some(y) = s.mean else { continue };
        let label = if modes.len() > 1 {
            format!("{} ({})", s.method, s.mode)
        } else {
            s.method.to_string()
        };
        match out.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.push((s.sweep_value, y)),
            None => out.push((label, vec![(s.sweep_value, y)])),
        }
    }
    for (_, pts) in &mut out {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if hi > lo {
        (lo, hi)
    } else {
        let pad = (lo.abs() * 0.05).max(0.5);
        (lo - pad, hi + pad)
    }
}

/// A fixed 800x600 line chart with one polyline per series and a text
/// legend.
pub fn line_chart(title: &str, series: &[Series]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 600.0;
    let (left, right, top, bottom) = (80.0, 600.0, 60.0, 540.0);
    let (x_lo, x_hi) = padded_range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let (y_lo, y_hi) = padded_range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)));
    let sx = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * (right - left);
    let sy = |y: f64| bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - top);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str(&format!("<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"));
    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"32\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">{}</text>\n",
        (left + right) / 2.0,
        escape(title)
    ));
    s.push_str(&format!(
        "<path d=\"M{left} {top} V{bottom} H{right}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    for k in 0..=4 {
        let y = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            left - 6.0,
            sy(y) + 4.0,
            tick(y)
        ));
    }
    let mut xs: Vec<f64> = series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            sx(x),
            bottom + 18.0,
            tick(x)
        ));
    }
    for (k, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        for &(x, y) in pts {
            s.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        }
        let ly = top + 20.0 * k as f64;
        s.push_str(&format!(
            "<line x1=\"620\" y1=\"{ly:.2}\" x2=\"640\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n"
        ));
        s.push_str(&format!(
            "<text x=\"646\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            ly + 4.0,
            escape(label)
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let t = format!("{v:.4}");
    let t = t.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" { "0".into() } else { t.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
