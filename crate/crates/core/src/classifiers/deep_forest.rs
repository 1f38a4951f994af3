//! Cascade forest: each layer holds a random forest and a completely random
//! extra-trees forest; both layers' class probabilities are appended to the
//! original features for the next layer. Layers are added while the F-measure
//! on a 20% validation split improves, up to `max_layers`.

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;

use super::forest::{Forest, ForestParams};
use super::tree::{Columns, MaxFeatures, Splitter, TreeParams};
use crate::evaluation::metrics::f_measure;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Debug, PartialEq)]
pub struct DeepForestParams {
    pub n_trees: usize,
    pub max_layers: usize,
    pub validation_fraction: f64,
}

impl Default for DeepForestParams {
    fn default() -> Self {
        DeepForestParams { n_trees: 100, max_layers: 5, validation_fraction: 0.2 }
    }
}

#[derive(Clone, Debug)]
pub struct DeepForest {
    layers: Vec<(Forest, Forest)>,
}

fn layer_params(n_trees: usize) -> (ForestParams, ForestParams) {
    let rf = ForestParams { n_trees, ..ForestParams::random_forest() };
    // Bootstrapped so that out-of-bag estimates exist for the augmentation.
    let crt = ForestParams {
        n_trees,
        bootstrap: true,
        tree: TreeParams { max_features: MaxFeatures::Fixed(1), splitter: Splitter::Random, ..TreeParams::default() },
    };
    (rf, crt)
}

fn augment(x: &ArrayView2<f64>, a: &[f64], b: &[f64]) -> Array2<f64> {
    let extra = Array2::from_shape_fn((x.nrows(), 2), |(i, j)| if j == 0 { a[i] } else { b[i] });
    concatenate(Axis(1), &[*x, extra.view()]).expect("row counts agree")
}

impl DeepForest {
    pub fn fit(x: ArrayView2<f64>, y: &[bool], params: &DeepForestParams, seed: u64) -> DeepForest {
        let n = y.len();
        let (train, val) = if n >= 10 { validation_split(y, params.validation_fraction, seed) } else { ((0..n).collect(), Vec::new()) };
        let xt = x.select(Axis(0), &train);
        let yt: Vec<bool> = train.iter().map(|&i| y[i]).collect();
        let yt_f: Vec<f64> = yt.iter().map(|&b| b as u8 as f64).collect();
        let xv = x.select(Axis(0), &val);
        let yv: Vec<bool> = val.iter().map(|&i| y[i]).collect();
        let (rf_p, crt_p) = layer_params(params.n_trees);

        let mut layers = Vec::new();
        let mut in_t = xt.clone();
        let mut in_v = xv.clone();
        let mut best_f = f64::NEG_INFINITY;
        for l in 0..params.max_layers.max(1) {
            let cols = Columns::from_view(in_t.view());
            let s = derive_seed(seed, 2 * l as u64 + 1);
            let (rf, rf_oob) = Forest::fit_with_oob(&cols, &yt_f, &rf_p, s);
            let (crt, crt_oob) = Forest::fit_with_oob(&cols, &yt_f, &crt_p, derive_seed(s, 1));
            let fill = |oob: Vec<Option<f64>>, f: &Forest| {
                let inbag = f.predict(&in_t.view());
                oob.into_iter().zip(inbag).map(|(o, p)| o.unwrap_or(p)).collect::<Vec<_>>()
            };
            let rf_t = fill(rf_oob, &rf);
            let crt_t = fill(crt_oob, &crt);
            if val.is_empty() {
                layers.push((rf, crt));
                break;
            }
            let rf_v = rf.predict(&in_v.view());
            let crt_v = crt.predict(&in_v.view());
            let pred: Vec<bool> = rf_v.iter().zip(&crt_v).map(|(a, b)| 0.5 * (a + b) >= 0.5).collect();
            let fv = f_measure(&pred, &yv);
            if l > 0 && fv <= best_f {
                break;
            }
            best_f = fv;
            layers.push((rf, crt));
            if fv >= 1.0 {
                break;
            }
            in_t = augment(&xt.view(), &rf_t, &crt_t);
            in_v = augment(&xv.view(), &rf_v, &crt_v);
        }
        let mut model = DeepForest { layers };
        if model.layers.len() > 1 {
            let full = model.predict_proba(&x);
            let first = DeepForest { layers: model.layers[..1].to_vec() }.predict_proba(&x);
            let f_of = |p: &[f64]| f_measure(&p.iter().map(|&v| v >= 0.5).collect::<Vec<_>>(), y);
            if f_of(&full) < f_of(&first) {
                model.layers.truncate(1);
            }
        }
        model
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn predict_proba(&self, x: &ArrayView2<f64>) -> Vec<f64> {
        let mut input = x.to_owned();
        let mut out = Vec::new();
        for (l, (rf, crt)) in self.layers.iter().enumerate() {
            let a = rf.predict(&input.view());
            let b = crt.predict(&input.view());
            out = a.iter().zip(&b).map(|(a, b)| 0.5 * (a + b)).collect();
            if l + 1 < self.layers.len() {
                input = augment(x, &a, &b);
            }
        }
        out
    }

    /// Training-set prediction of the first layer alone.
    pub fn first_layer_proba(&self, x: &ArrayView2<f64>) -> Vec<f64> {
        DeepForest { layers: self.layers[..1].to_vec() }.predict_proba(x)
    }
}

/// Class-stratified random split; returns (train, validation) row indices.
fn validation_split(y: &[bool], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = rng_from_seed(derive_seed(seed, 0));
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_val = ((idx.len() as f64) * fraction).round() as usize;
        // Keep at least one row of each class for training.
        let n_val = n_val.min(idx.len().saturating_sub(1));
        val.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    #[test]
    fn cascade_never_worse_than_first_layer_on_training() {
        for seed in 0..3 {
            let mut rng = rng_from_seed(seed);
            let x = Array2::from_shape_fn((80, 3), |_| rng.random_range(-1.0..1.0));
            let y: Vec<bool> = x.rows().into_iter().map(|r| r[0] * r[1] + 0.2 * r[2] > 0.0).collect();
            let params = DeepForestParams { n_trees: 20, ..DeepForestParams::default() };
            let m = DeepForest::fit(x.view(), &y, &params, seed);
            assert!(m.n_layers() >= 1 && m.n_layers() <= 5);
            let f_of = |p: Vec<f64>| f_measure(&p.iter().map(|&v| v >= 0.5).collect::<Vec<_>>(), &y);
            assert!(f_of(m.predict_proba(&x.view())) >= f_of(m.first_layer_proba(&x.view())));
        }
    }
}
