//! Shared fixtures for the benchmarks.

use nalgebra::DMatrix;
use svmma::cv::CvMarginMatrix;
use svmma::data::{generate, DgpConfig};
use svmma::Dataset;

pub fn dgp1_sample(n: usize, p: usize, seed: u64) -> Dataset {
    generate(&DgpConfig::dgp1(n, p, 4.min(p), seed)).expect("valid generator config")
}

/// Margins of `s_n` overlapping scorers on `n` rows, deterministic.
pub fn margin_instance(n: usize, s_n: usize) -> CvMarginMatrix {
    let z = DMatrix::from_fn(n, s_n, |i, s| {
        let t = (i * 31 + s * 17) as f64;
        0.6 + (t * 0.37).sin() + 0.1 * s as f64
    });
    CvMarginMatrix::new(z).expect("finite margins")
}
