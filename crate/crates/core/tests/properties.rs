//! Randomized invariant checks for every module.

mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use svmma::baselines::*;
use svmma::candidates::{build_candidates, embed, CandidateSet, ModelSpec};
use svmma::cv::*;
use svmma::data::*;
use svmma::experiments::*;
use svmma::metrics::{error_rate, TestOracle};
use svmma::screening::*;
use svmma::svm::{objective_l2, train_l2_svm};
use svmma::{Coefficients, L2SolverConfig};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn random_ordering(r: &mut ChaCha8Rng, p: usize) -> FeatureOrdering {
    let mut f: Vec<usize> = (0..p).collect();
    f.shuffle(r);
    FeatureOrdering::from_features(&f).unwrap()
}

fn random_coefficients(r: &mut ChaCha8Rng, p: usize) -> Coefficients {
    Coefficients::new(
        r.random_range(-1.0..1.0),
        (0..p).map(|_| r.random_range(-1.5..1.5)).collect(),
    )
}

fn random_z(r: &mut ChaCha8Rng, n: usize, s: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, s, |_, _| r.random_range(-2.0..3.0))
}

fn row_key(data: &Dataset, i: usize) -> Vec<u64> {
    let mut k: Vec<u64> = data.row(i).iter().map(|v| v.to_bits()).collect();
    k.push(data.labels()[i].to_bits());
    k
}

fn norm(w: &[f64]) -> f64 {
    w.iter().map(|v| v * v).sum::<f64>().sqrt()
}

// data

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn split_then_concat_keeps_rows(seed in any::<u64>(), n in 2usize..40, p in 1usize..5, g in 0.05f64..0.95) {
        let data = random_dataset(&mut rng(seed), n.max(2), p);
        let spec = SplitSpec { train_fraction: g, seed };
        prop_assume!(spec.train_size(n) >= 1 && spec.train_size(n) < n);
        let (train, test) = split(&data, &spec).unwrap();
        prop_assert_eq!(train.n_samples(), spec.train_size(n));
        let joined = train.concat(&test).unwrap();
        let mut a: Vec<_> = (0..n).map(|i| row_key(&data, i)).collect();
        let mut b: Vec<_> = (0..n).map(|i| row_key(&joined, i)).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn standardization_is_a_fixed_point(seed in any::<u64>(), n in 2usize..40, p in 1usize..5) {
        let data = random_dataset(&mut rng(seed), n, p);
        let (once, params) = standardize(&data);
        prop_assert!(params.scales.iter().all(|s| *s >= 0.0));
        let again = apply_standardization(&data, &params).unwrap();
        let (twice, _) = standardize(&once);
        for i in 0..n {
            for j in 0..p {
                prop_assert!((again.features()[(i, j)] - once.features()[(i, j)]).abs() <= 1e-10);
                prop_assert!((twice.features()[(i, j)] - once.features()[(i, j)]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn generated_labels_are_signs(seed in any::<u64>(), n in 1usize..60, p in 1usize..8, two in any::<bool>()) {
        let q = 1 + (seed as usize) % p;
        let cfg = if two { DgpConfig::dgp2(n, p, q, seed) } else { DgpConfig::dgp1(n, p, q, seed) };
        let d = generate(&cfg).unwrap();
        prop_assert!(d.labels().iter().all(|&y| y == 1.0 || y == -1.0));
        prop_assert!(d.features().iter().all(|v| v.is_finite()));
    }
}

#[test]
fn dgp1_class_means_are_mirror_images() {
    let (p, q) = (6, 3);
    for seed in 0..5 {
        let d = generate(&DgpConfig::dgp1(8000, p, q, seed)).unwrap();
        for (class, sign) in [(1.0, 1.0), (-1.0, -1.0)] {
            let rows: Vec<usize> = (0..d.n_samples()).filter(|&i| d.labels()[i] == class).collect();
            for j in 0..p {
                let m = rows.iter().map(|&i| d.features()[(i, j)]).sum::<f64>() / rows.len() as f64;
                let expected = if j < q { sign * DGP1_MEAN } else { 0.0 };
                assert!((m - expected).abs() < 0.08, "seed {seed} class {class} col {j}: {m}");
            }
        }
    }
}

#[test]
fn dgp1_covariance_matches() {
    let (n, p, q) = (10_000, 5, 2);
    let d = generate(&DgpConfig::dgp1(n, p, q, 99)).unwrap();
    let centered = DMatrix::from_fn(n, p, |i, j| {
        let mu = if j < q { DGP1_MEAN } else { 0.0 };
        d.features()[(i, j)] - d.labels()[i] * mu
    });
    let cov = centered.transpose() * &centered / n as f64;
    let sigma = dgp1_covariance(p);
    for i in 0..p {
        for j in 0..p {
            assert!((cov[(i, j)] - sigma[(i, j)]).abs() < 0.05, "({i},{j}) {}", cov[(i, j)]);
        }
    }
}

// svm

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn l2_fit_beats_perturbations(seed in any::<u64>(), n in 4usize..30, p in 1usize..4, k in 0usize..3) {
        let lambda = [0.01, 0.1, 1.0][k];
        let mut r = rng(seed);
        let data = random_dataset(&mut r, n, p);
        let (beta, report) = train_l2_svm(&data, &L2SolverConfig::with_lambda(lambda)).unwrap();
        prop_assert!(report.certified_gap >= 0.0);
        let base = objective_l2(&data, &beta, lambda, None).unwrap();
        for _ in 0..100 {
            let scale = 10f64.powf(r.random_range(-4.0..0.0));
            let moved = Coefficients::new(
                beta.intercept + scale * r.random_range(-1.0..1.0),
                beta.weights.iter().map(|w| w + scale * r.random_range(-1.0..1.0)).collect(),
            );
            let v = objective_l2(&data, &moved, lambda, None).unwrap();
            prop_assert!(v >= base - report.certified_gap - 1e-12, "{v} < {base}");
        }
    }

    #[test]
    fn l2_norm_shrinks_with_lambda(seed in any::<u64>(), n in 4usize..30, p in 1usize..4) {
        let data = random_dataset(&mut rng(seed), n, p);
        let fits: Vec<(f64, f64)> = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0]
            .iter()
            .map(|&l| {
                let (beta, rep) = train_l2_svm(&data, &L2SolverConfig::with_lambda(l)).unwrap();
                // strong convexity bounds the distance to the exact solution
                (norm(&beta.weights), (2.0 * rep.certified_gap / l).sqrt() + 1e-9)
            })
            .collect();
        for w in fits.windows(2) {
            prop_assert!(w[1].0 <= w[0].0 + w[0].1 + w[1].1, "{:?}", fits);
        }
    }

    #[test]
    fn intercept_shift_only_moves_the_loss(seed in any::<u64>(), n in 2usize..30, p in 1usize..4, c in -3.0f64..3.0) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, n, p);
        let beta = random_coefficients(&mut r, p);
        let shifted = Coefficients::new(beta.intercept + c, beta.weights.clone());
        let lambda = 0.3;
        let lhs = objective_l2(&data, &shifted, lambda, None).unwrap() - objective_l2(&data, &beta, lambda, None).unwrap();
        let rhs = mean_hinge(&data, &shifted) - mean_hinge(&data, &beta);
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn duplicate_sample_equals_weight_two(seed in any::<u64>(), n in 3usize..25, p in 1usize..4) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, n, p);
        let k = r.random_range(0..n);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.push(k);
        let dup = data.select_rows(&idx);
        let mut weights = vec![1.0; n];
        weights[k] = 2.0;
        let lambda = 0.1;
        let beta = random_coefficients(&mut r, p);
        let a = objective_l2(&dup, &beta, lambda, None).unwrap();
        let b = objective_l2(&data, &beta, lambda, Some(&weights)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);

        let cfg = L2SolverConfig { sample_weights: Some(weights.clone()), ..L2SolverConfig::with_lambda(lambda) };
        let (bw, rw) = train_l2_svm(&data, &cfg).unwrap();
        let (bd, rd) = train_l2_svm(&dup, &L2SolverConfig::with_lambda(lambda)).unwrap();
        let ow = objective_l2(&dup, &bw, lambda, None).unwrap();
        let od = objective_l2(&dup, &bd, lambda, None).unwrap();
        prop_assert!((ow - od).abs() <= rw.certified_gap + rd.certified_gap + 1e-12);
    }
}

// screening

fn quick_screening() -> ScreeningConfig {
    ScreeningConfig {
        steps: 6,
        ..ScreeningConfig::default()
    }
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn ordering_is_a_permutation_and_follows_deaths(seed in any::<u64>(), n in 4usize..25, p in 1usize..6) {
        let data = random_dataset(&mut rng(seed), n, p);
        let ord = screen_features(&data, &quick_screening()).unwrap();
        prop_assert_eq!(ord.order().len(), p + 1);
        prop_assert_eq!(ord.order()[0], Term::Intercept);
        let mut f = ord.features();
        let steps = ord.activation_step().to_vec();
        let key = |j: usize| steps[j].unwrap_or(usize::MAX);
        for pair in f.windows(2) {
            prop_assert!(key(pair[0]) >= key(pair[1]), "{:?} {:?}", f, steps);
        }
        f.sort_unstable();
        prop_assert_eq!(f, (0..p).collect::<Vec<_>>());
    }

    #[test]
    fn large_l1_penalty_zeroes_everything(seed in any::<u64>(), n in 2usize..25, p in 1usize..5, u in 0.0f64..2.0) {
        let data = random_dataset(&mut rng(seed), n, p);
        let lambda = lambda_max(&data) * (1.0 + u);
        let fit = train_l1_svm(&data, lambda, 1e-9).unwrap();
        prop_assert!(fit.coefficients.weights.iter().all(|w| w.abs() <= 1e-8), "{:?}", fit.coefficients);
    }
}

// candidates

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn screened_candidates_are_nested(seed in any::<u64>(), p in 1usize..30, frac in 0.0f64..1.0) {
        let ord = random_ordering(&mut rng(seed), p);
        let s_n = 1 + ((p - 1) as f64 * frac) as usize;
        let cands = build_candidates(&ord, s_n).unwrap();
        prop_assert!(cands.is_nested());
        for (s, m) in cands.models().iter().enumerate() {
            prop_assert_eq!(m.size(), s + 1);
        }
        for pair in cands.models().windows(2) {
            prop_assert!(pair[0].feature_indices().iter().all(|&j| pair[1].contains(j)));
        }
    }

    #[test]
    fn embedding_is_linear(seed in any::<u64>(), p in 1usize..20, a in -3.0f64..3.0, c in -3.0f64..3.0) {
        let mut r = rng(seed);
        let k = r.random_range(1..=p);
        let mut idx: Vec<usize> = (0..p).collect();
        idx.shuffle(&mut r);
        let spec = ModelSpec::new(idx[..k].to_vec(), p).unwrap();
        let b1 = random_coefficients(&mut r, k);
        let b2 = random_coefficients(&mut r, k);
        let mix = Coefficients::new(
            a * b1.intercept + c * b2.intercept,
            b1.weights.iter().zip(&b2.weights).map(|(x, y)| a * x + c * y).collect(),
        );
        let lhs = embed(&mix, &spec, p).unwrap();
        let (e1, e2) = (embed(&b1, &spec, p).unwrap(), embed(&b2, &spec, p).unwrap());
        prop_assert!((lhs.intercept - (a * e1.intercept + c * e2.intercept)).abs() <= 1e-12);
        for j in 0..p {
            prop_assert!((lhs.weights[j] - (a * e1.weights[j] + c * e2.weights[j])).abs() <= 1e-12);
        }
    }
}

// cv

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn weights_are_feasible_and_optimal(seed in any::<u64>(), n in 1usize..40, s in 1usize..7) {
        let mut r = rng(seed);
        let z = random_z(&mut r, n, s);
        let m = CvMarginMatrix::new(z.clone()).unwrap();
        let (w, obj) = solve_weights(&m, 1e-9).unwrap();
        assert_on_simplex(w.as_slice());
        prop_assert!((obj - simplex_objective(&z, w.as_slice())).abs() <= 1e-12);
        for _ in 0..1000 {
            let v = random_simplex(&mut r, s);
            prop_assert!(obj <= simplex_objective(&z, &v) + 1e-9);
        }
        for k in 0..s {
            prop_assert!(obj <= m.objective(WeightVector::unit(s, k).as_slice()) + 1e-9);
        }
    }

    #[test]
    fn cv_objective_is_convex(seed in any::<u64>(), n in 1usize..40, s in 1usize..7, t in 0.0f64..1.0) {
        let mut r = rng(seed);
        let m = CvMarginMatrix::new(random_z(&mut r, n, s)).unwrap();
        let (w1, w2) = (random_simplex(&mut r, s), random_simplex(&mut r, s));
        let mid: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        prop_assert!(m.objective(&mid) <= t * m.objective(&w1) + (1.0 - t) * m.objective(&w2) + 1e-12);
    }

    #[test]
    fn duplicate_candidate_keeps_optimum(seed in any::<u64>(), n in 1usize..40, s in 1usize..6) {
        let mut r = rng(seed);
        let z = random_z(&mut r, n, s);
        let k = r.random_range(0..s);
        let dup = DMatrix::from_fn(n, s + 1, |i, j| z[(i, if j == s { k } else { j })]);
        let (_, a) = solve_weights(&CvMarginMatrix::new(z).unwrap(), 1e-9).unwrap();
        let (w, b) = solve_weights(&CvMarginMatrix::new(dup.clone()).unwrap(), 1e-9).unwrap();
        prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        // folding the copy back onto the original gives the same objective
        let mut merged = w.as_slice()[..s].to_vec();
        merged[k] += w.as_slice()[s];
        prop_assert!((simplex_objective(&dup, w.as_slice()) - simplex_objective(&dup.columns(0, s).into_owned(), &merged)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(cases(300))]

    #[test]
    fn margin_matrix_matches_direct_cv(seed in any::<u64>(), n in 8usize..30, p in 1usize..4, folds in 2usize..6) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, n, p);
        let cands = build_candidates(&random_ordering(&mut r, p), p).unwrap();
        let plan = make_folds(n, folds, Some(seed)).unwrap();
        let fits = fit_fold_models(&data, &cands, &plan, 1e-6).unwrap();
        let z = build_cv_matrix(&data, &cands, &plan, &fits).unwrap();
        for _ in 0..5 {
            let w = random_simplex(&mut r, cands.len());
            prop_assert!((z.objective(&w) - direct_cv(&data, &cands, &plan, &fits, &w)).abs() <= 1e-12);
        }
    }
}

// baselines

fn random_scores(r: &mut ChaCha8Rng, s: usize) -> IcScore {
    IcScore {
        // coarse values make ties likely
        per_model: (0..s).map(|_| r.random_range(0..20) as f64 * 0.5).collect(),
        which: IcKind::Svmicl,
        sizes: (1..=s).collect(),
    }
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn ic_selection_is_a_vertex(seed in any::<u64>(), s in 1usize..15) {
        let w = select_by_ic(&random_scores(&mut rng(seed), s));
        prop_assert_eq!(w.as_slice().iter().filter(|&&v| v == 1.0).count(), 1);
        prop_assert_eq!(w.as_slice().iter().filter(|&&v| v == 0.0).count(), s - 1);
    }

    #[test]
    fn smoothed_weights_ignore_shifts(seed in any::<u64>(), s in 1usize..15, shift in -1e3f64..1e3, n in 1usize..500) {
        let scores = random_scores(&mut rng(seed), s);
        let moved = IcScore { per_model: scores.per_model.iter().map(|v| v + shift).collect(), ..scores.clone() };
        let (a, b) = (smoothed_ic_weights(&scores, n), smoothed_ic_weights(&moved, n));
        assert_on_simplex(a.as_slice());
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn heavier_penalty_selects_smaller_models(seed in any::<u64>(), n in 3usize..40, p in 1usize..8) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, n, p);
        let cands = build_candidates(&random_ordering(&mut r, p), p).unwrap();
        let fits: Vec<Coefficients> = cands
            .models()
            .iter()
            .map(|m| embed(&random_coefficients(&mut r, m.size()), m, p).unwrap())
            .collect();
        let size = |k: IcKind| {
            let sc = ic_scores(&data, &fits, &cands, k).unwrap();
            cands.models()[select_by_ic(&sc).argmax()].size()
        };
        prop_assert!(size(IcKind::Svmich) <= size(IcKind::Svmicl));
    }
}

proptest! {
    #![proptest_config(cases(300))]

    #[test]
    fn boosting_weights_stay_on_the_simplex(seed in any::<u64>(), n in 6usize..30, p in 1usize..4, rounds in 1usize..10) {
        let mut r = rng(seed);
        let data = random_dataset(&mut r, n, p);
        let cands = build_candidates(&random_ordering(&mut r, p), p).unwrap();
        let e = AdaBoostEnsemble::fit(&data, &cands, &EnsembleConfig::new(EnsembleMethod::Ada, rounds, seed)).unwrap();
        for w in &e.weight_history {
            prop_assert!(w.iter().all(|&v| v >= 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}

// metrics

fn random_fits(r: &mut ChaCha8Rng, s: usize, p: usize) -> Vec<Coefficients> {
    (0..s).map(|_| random_coefficients(r, p)).collect()
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn nhl_is_at_least_one(seed in any::<u64>(), n in 2usize..40, p in 1usize..4, s in 1usize..6) {
        let mut r = rng(seed);
        let test = random_dataset(&mut r, n, p);
        let oracle = TestOracle::new(&test, &random_fits(&mut r, s, p)).unwrap();
        let mut candidates = vec![WeightVector::uniform(s)];
        candidates.extend((0..s).map(|k| WeightVector::unit(s, k)));
        candidates.push(WeightVector::from_nearly_feasible(&random_simplex(&mut r, s)).unwrap());
        for w in &candidates {
            if let Some(v) = oracle.nhl(w).unwrap().value() {
                prop_assert!(v >= 1.0 - 1e-9, "{v}");
            }
        }
    }

    #[test]
    fn error_rate_ignores_positive_scaling(seed in any::<u64>(), n in 1usize..40, p in 1usize..4, s in 1usize..5, c in 1e-3f64..1e3) {
        let mut r = rng(seed);
        let test = random_dataset(&mut r, n.max(2), p);
        let fits = random_fits(&mut r, s, p);
        let scaled: Vec<Coefficients> = fits
            .iter()
            .map(|b| Coefficients::new(c * b.intercept, b.weights.iter().map(|w| c * w).collect()))
            .collect();
        let w = WeightVector::from_nearly_feasible(&random_simplex(&mut r, s)).unwrap();
        let er = |f: &[Coefficients]| {
            let pred: Vec<f64> = (0..test.n_samples()).map(|i| predict(&test.row(i), &w, f).unwrap()).collect();
            error_rate(&pred, test.labels()).unwrap()
        };
        prop_assert_eq!(er(&fits), er(&scaled));
    }

    #[test]
    fn averaging_beats_averaged_losses(seed in any::<u64>(), n in 2usize..40, p in 1usize..4, s in 1usize..6) {
        let mut r = rng(seed);
        let test = random_dataset(&mut r, n, p);
        let fits = random_fits(&mut r, s, p);
        let oracle = TestOracle::new(&test, &fits).unwrap();
        let uniform = oracle.risk(&WeightVector::uniform(s)).unwrap();
        prop_assert!((uniform - mean_hinge(&test, &combine(&fits, &WeightVector::uniform(s)))).abs() <= 1e-12);
        let per_model = fits.iter().map(|b| mean_hinge(&test, b)).sum::<f64>() / s as f64;
        prop_assert!(uniform <= per_model + 1e-12);
    }
}

// experiments

fn tiny(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n: 30,
        n_grid: None,
        p: 5,
        q: 2,
        n_test: 60,
        replications: 3,
        folds: 3,
        candidates: 3,
        screening: quick_screening(),
        methods: vec![Method::Svmma, Method::Scl, Method::Unif, Method::Bag],
        rounds: Some(3),
        seed,
        ..ExperimentConfig::default()
    }
}

proptest! {
    #![proptest_config(cases(8))]

    #[test]
    fn replications_do_not_depend_on_each_other(seed in any::<u64>(), scenario in 0usize..2) {
        let cfg = ExperimentConfig {
            scenario: [Scenario::S1, Scenario::S2][scenario],
            ..tiny(seed)
        };
        let all = run_experiment(&cfg).unwrap();
        let per = cfg.methods.len();
        for d in 0..cfg.replications {
            let alone = run_replication(&ExperimentConfig { replications: 1, ..cfg.clone() }, d).unwrap();
            prop_assert_eq!(&all[d * per..(d + 1) * per], &alone[..]);
        }
    }
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn aggregates_are_row_means(seed in any::<u64>(), reps in 1usize..12) {
        let mut r = rng(seed);
        let rows: Vec<ResultRow> = (0..reps)
            .flat_map(|d| {
                let nhl = r.random_range(1.0..2.0);
                let er = r.random_range(0.0..0.5);
                let separable = r.random_bool(0.2);
                [Method::Svmma, Method::Unif].map(|m| ResultRow {
                    method: m,
                    mode: "simulate".into(),
                    sweep_value: 100.0,
                    replication: d,
                    nhl: (!separable).then_some(nhl),
                    er: Some(er),
                    wall_time_ms: None,
                    seed,
                    status: if separable { STATUS_SEPARABLE } else { STATUS_OK }.into(),
                })
            })
            .collect();
        for s in aggregate(&rows) {
            let values: Vec<f64> = rows
                .iter()
                .filter(|row| row.method == s.method)
                .filter_map(|row| if s.metric == "nhl" { row.nhl } else { row.er })
                .collect();
            prop_assert_eq!(s.count, values.len());
            prop_assert_eq!(s.count + s.excluded, reps);
            match s.mean {
                Some(m) => prop_assert!((m - values.iter().sum::<f64>() / values.len() as f64).abs() <= 1e-12),
                None => prop_assert!(values.is_empty()),
            }
        }
    }

    #[test]
    fn s1_candidates_all_miss_a_signal(seed in any::<u64>(), p in 2usize..30, q_frac in 0.0f64..1.0, s_frac in 0.0f64..1.0) {
        let q = 1 + ((p - 1) as f64 * q_frac) as usize;
        let s_n = 1 + ((p - 2) as f64 * s_frac) as usize;
        let cands: CandidateSet = s1_candidates(&random_ordering(&mut rng(seed), p), s_n, q).unwrap();
        prop_assert_eq!(cands.len(), s_n);
        for (s, m) in cands.models().iter().enumerate() {
            prop_assert_eq!(m.size(), s + 1);
            prop_assert!((0..q).any(|j| !m.contains(j)));
        }
    }
}
