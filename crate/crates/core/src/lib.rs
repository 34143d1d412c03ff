//! Cross-validation model averaging for linear support vector machines.
//!
//! The pipeline screens features with an L1-penalized SVM path, builds a
//! nested sequence of candidate linear SVMs, fits each candidate on J-fold
//! complements, and chooses simplex weights that minimize the out-of-fold
//! hinge loss. The weighted combination of full-data fits is then used for
//! prediction.
//!
//! ```no_run
//! use svmma::{data, screening, candidates, cv};
//!
//! let train = data::gen_dgp1(&data::DgpConfig::dgp1(200, 20, 4, 7)).unwrap();
//! let ordering = screening::screen_features(&train, &screening::ScreeningConfig::default()).unwrap();
//! let cands = candidates::build_candidates(&ordering, 10).unwrap();
//! let model = cv::SvmmaModel::fit(&train, &cands, &cv::CvConfig::default()).unwrap();
//! let label = model.predict(train.row(0).as_slice());
//! # let _ = label;
//! ```

pub mod baselines;
pub mod candidates;
pub mod cv;
pub mod data;
pub mod error;
pub mod experiments;
pub mod lp;
pub mod metrics;
pub mod rng;
pub mod screening;
pub mod svm;

pub use candidates::{CandidateSet, ModelSpec};
pub use cv::{FoldPlan, SvmmaModel, WeightVector};
pub use data::Dataset;
pub use error::{Result, SvmmaError};
pub use screening::{FeatureOrdering, Term};
pub use svm::{Coefficients, FitReport, L2SolverConfig};
