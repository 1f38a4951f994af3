//! Synthetic datasets for smoke runs and tests.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::rng::rng_from_seed;

/// Two isotropic unit-variance Gaussian blobs whose centres are `separation`
/// standard deviations apart. The class shift is spread evenly over the first
/// `informative` coordinates; the rest are pure noise.
pub fn gaussian_blobs(
    n: usize,
    n_features: usize,
    positive_fraction: f64,
    separation: f64,
    informative: usize,
    seed: u64,
) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let n_pos = (positive_fraction * n as f64).round() as usize;
    let mut labels: Vec<bool> = (0..n).map(|i| i < n_pos).collect();
    labels.shuffle(&mut rng);
    let informative = informative.clamp(1, n_features.max(1));
    let shift = separation / 2.0 / (informative as f64).sqrt();
    let x = Array2::from_shape_fn((n, n_features), |(i, j)| {
        let z: f64 = StandardNormal.sample(&mut rng);
        if j < informative {
            z + if labels[i] { shift } else { -shift }
        } else {
            z
        }
    });
    Dataset::new(x, labels).expect("generated data is finite")
}
