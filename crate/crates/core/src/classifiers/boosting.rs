//! AdaBoost over stumps, gradient boosting and histogram gradient boosting
//! with log-loss.

use ndarray::{Array2, ArrayView2};

use super::tree::{Columns, Tree, TreeParams};
use crate::rng::rng_from_seed;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Clone, Debug)]
pub struct AdaBoost {
    stumps: Vec<(Tree, f64)>,
}

impl AdaBoost {
    pub fn fit(x: ArrayView2<f64>, y: &[bool], rounds: usize, seed: u64) -> AdaBoost {
        let cols = Columns::from_view(x);
        let n = y.len();
        let target: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
        let mut w = vec![1.0 / n as f64; n];
        let params = TreeParams { max_depth: Some(1), ..TreeParams::default() };
        let mut rng = rng_from_seed(seed);
        let mut stumps = Vec::new();
        for _ in 0..rounds {
            let stump = Tree::fit(&cols, &target, &w, &params, &mut rng);
            let h: Vec<bool> = (0..n).map(|i| stump.predict_columns(&cols, i) >= 0.5).collect();
            let err: f64 = (0..n).filter(|&i| h[i] != y[i]).map(|i| w[i]).sum::<f64>() / w.iter().sum::<f64>();
            if err >= 0.5 {
                if stumps.is_empty() {
                    stumps.push((stump, 1.0));
                }
                break;
            }
            if err <= 1e-12 {
                stumps.push((stump, 10.0));
                break;
            }
            let alpha = 0.5 * ((1.0 - err) / err).ln();
            for i in 0..n {
                w[i] *= if h[i] == y[i] { (-alpha).exp() } else { alpha.exp() };
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            stumps.push((stump, alpha));
        }
        AdaBoost { stumps }
    }

    pub fn predict_proba(&self, x: &ArrayView2<f64>) -> Vec<f64> {
        (0..x.nrows())
            .map(|i| {
                let f: f64 = self
                    .stumps
                    .iter()
                    .map(|(t, a)| if t.predict_row(x, i) >= 0.5 { *a } else { -*a })
                    .sum();
                sigmoid(2.0 * f)
            })
            .collect()
    }
}

/// Log-loss gradient boosting with Newton-step leaf values.
#[derive(Clone, Debug)]
pub struct GradientBoosting {
    init: f64,
    lr: f64,
    trees: Vec<Tree>,
    bins: Option<Binner>,
}

pub struct BoostParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub tree: TreeParams,
}

impl GradientBoosting {
    pub fn fit(x: ArrayView2<f64>, y: &[bool], params: &BoostParams, seed: u64) -> GradientBoosting {
        Self::fit_inner(x, y, params, seed, None)
    }

    /// Histogram variant: features are quantised into at most `max_bins`
    /// quantile bins before boosting.
    pub fn fit_hist(x: ArrayView2<f64>, y: &[bool], params: &BoostParams, max_bins: usize, seed: u64) -> GradientBoosting {
        Self::fit_inner(x, y, params, seed, Some(Binner::fit(&x, max_bins)))
    }

    fn fit_inner(
        x: ArrayView2<f64>,
        y: &[bool],
        params: &BoostParams,
        seed: u64,
        bins: Option<Binner>,
    ) -> GradientBoosting {
        let binned = bins.as_ref().map(|b| b.transform(&x));
        let xv = binned.as_ref().map_or(x, |b| b.view());
        let cols = Columns::from_view(xv);
        let n = y.len();
        let yf: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
        let p0 = (yf.iter().sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6);
        let init = (p0 / (1.0 - p0)).ln();
        let mut f = vec![init; n];
        let ones = vec![1.0; n];
        let mut rng = rng_from_seed(seed);
        let mut trees = Vec::with_capacity(params.rounds);
        for _ in 0..params.rounds {
            let p: Vec<f64> = f.iter().map(|&v| sigmoid(v)).collect();
            let resid: Vec<f64> = (0..n).map(|i| yf[i] - p[i]).collect();
            if resid.iter().all(|r| r.abs() < 1e-9) {
                break;
            }
            let mut tree = Tree::fit(&cols, &resid, &ones, &params.tree, &mut rng);
            let leaves: Vec<usize> = (0..n).map(|i| tree.leaf_index(&xv, i)).collect();
            let mut num = std::collections::HashMap::<usize, (f64, f64)>::new();
            for i in 0..n {
                let e = num.entry(leaves[i]).or_insert((0.0, 0.0));
                e.0 += resid[i];
                e.1 += p[i] * (1.0 - p[i]);
            }
            let mut leaf_ids: Vec<_> = num.keys().copied().collect();
            leaf_ids.sort_unstable();
            for leaf in leaf_ids {
                let (g, h) = num[&leaf];
                let v = if h > 1e-12 { g / h } else { 0.0 };
                tree.set_leaf_value(leaf, v.clamp(-10.0, 10.0));
            }
            for i in 0..n {
                f[i] += params.learning_rate * tree.predict_row(&xv, i);
            }
            trees.push(tree);
        }
        GradientBoosting { init, lr: params.learning_rate, trees, bins }
    }

    pub fn predict_proba(&self, x: &ArrayView2<f64>) -> Vec<f64> {
        let binned = self.bins.as_ref().map(|b| b.transform(x));
        let xv = binned.as_ref().map_or(*x, |b| b.view());
        (0..xv.nrows())
            .map(|i| sigmoid(self.init + self.lr * self.trees.iter().map(|t| t.predict_row(&xv, i)).sum::<f64>()))
            .collect()
    }
}

/// Per-feature quantile bin edges; values map to their bin index.
#[derive(Clone, Debug)]
struct Binner {
    edges: Vec<Vec<f64>>,
}

impl Binner {
    fn fit(x: &ArrayView2<f64>, max_bins: usize) -> Binner {
        let edges = x
            .columns()
            .into_iter()
            .map(|col| {
                let mut v: Vec<f64> = col.to_vec();
                v.sort_unstable_by(f64::total_cmp);
                v.dedup();
                if v.len() <= max_bins {
                    return v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                }
                let mut e: Vec<f64> = (1..max_bins)
                    .map(|q| {
                        let pos = q as f64 / max_bins as f64 * (v.len() - 1) as f64;
                        let i = pos.floor() as usize;
                        0.5 * (v[i] + v[(i + 1).min(v.len() - 1)])
                    })
                    .collect();
                e.dedup();
                e
            })
            .collect();
        Binner { edges }
    }

    fn transform(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        Array2::from_shape_fn(x.dim(), |(i, j)| self.edges[j].partition_point(|&e| e < x[[i, j]]) as f64)
    }
}
