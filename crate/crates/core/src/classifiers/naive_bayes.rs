use ndarray::ArrayView2;

/// Gaussian naive Bayes with sklearn-style variance smoothing.
#[derive(Clone, Debug)]
pub struct GaussianNb {
    log_prior: [f64; 2],
    mean: [Vec<f64>; 2],
    var: [Vec<f64>; 2],
}

pub const VAR_SMOOTHING: f64 = 1e-9;

impl GaussianNb {
    pub fn fit(x: ArrayView2<f64>, y: &[bool]) -> GaussianNb {
        let w: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
        Self::fit_soft(x, &w)
    }

    /// Fits with per-row positive-class responsibilities `r` in [0, 1]; a row
    /// contributes weight `r` to the positive class and `1 - r` to the
    /// negative class. Used by the EM step of S-EM.
    pub fn fit_soft(x: ArrayView2<f64>, r: &[f64]) -> GaussianNb {
        let (n, d) = x.dim();
        let mut eps = 0.0f64;
        for j in 0..d {
            let col = x.column(j);
            let m = col.sum() / n as f64;
            let v = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            eps = eps.max(v);
        }
        eps = (eps * VAR_SMOOTHING).max(1e-300);

        let mut mean = [vec![0.0; d], vec![0.0; d]];
        let mut var = [vec![0.0; d], vec![0.0; d]];
        let mut total = [0.0; 2];
        for (i, row) in x.rows().into_iter().enumerate() {
            let wc = [1.0 - r[i], r[i]];
            for c in 0..2 {
                total[c] += wc[c];
                for j in 0..d {
                    mean[c][j] += wc[c] * row[j];
                }
            }
        }
        for c in 0..2 {
            if total[c] > 0.0 {
                mean[c].iter_mut().for_each(|m| *m /= total[c]);
            }
        }
        for (i, row) in x.rows().into_iter().enumerate() {
            let wc = [1.0 - r[i], r[i]];
            for c in 0..2 {
                for j in 0..d {
                    let dlt = row[j] - mean[c][j];
                    var[c][j] += wc[c] * dlt * dlt;
                }
            }
        }
        for c in 0..2 {
            for v in var[c].iter_mut() {
                *v = if total[c] > 0.0 { *v / total[c] } else { 0.0 } + eps;
            }
        }
        let sum = total[0] + total[1];
        let log_prior = [(total[0] / sum).ln(), (total[1] / sum).ln()];
        GaussianNb { log_prior, mean, var }
    }

    fn joint_log(&self, row: impl Iterator<Item = f64> + Clone) -> [f64; 2] {
        let mut out = self.log_prior;
        for c in 0..2 {
            for (j, v) in row.clone().enumerate() {
                let var = self.var[c][j];
                let dlt = v - self.mean[c][j];
                out[c] -= 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + dlt * dlt / var);
            }
        }
        out
    }

    pub fn predict_proba(&self, x: &ArrayView2<f64>) -> Vec<f64> {
        x.rows().into_iter().map(|row| posterior(self.joint_log(row.iter().copied()))).collect()
    }
}

/// P(class 1) from two joint log-likelihoods.
pub(crate) fn posterior(l: [f64; 2]) -> f64 {
    match (l[0] == f64::NEG_INFINITY, l[1] == f64::NEG_INFINITY) {
        (true, true) => 0.5,
        (true, false) => 1.0,
        (false, true) => 0.0,
        _ => 1.0 / (1.0 + (l[0] - l[1]).exp()),
    }
}

/// Bernoulli naive Bayes on features binarised at a threshold (default 0),
/// with Laplace smoothing alpha = 1.
#[derive(Clone, Debug)]
pub struct BernoulliNb {
    threshold: f64,
    log_prior: [f64; 2],
    log_p: [Vec<f64>; 2],
    log_q: [Vec<f64>; 2],
}

impl BernoulliNb {
    pub fn fit(x: ArrayView2<f64>, y: &[bool], threshold: f64) -> BernoulliNb {
        let d = x.ncols();
        let mut ones = [vec![0.0; d], vec![0.0; d]];
        let mut count = [0.0f64; 2];
        for (row, &yi) in x.rows().into_iter().zip(y) {
            let c = yi as usize;
            count[c] += 1.0;
            for j in 0..d {
                if row[j] > threshold {
                    ones[c][j] += 1.0;
                }
            }
        }
        let alpha = 1.0f64;
        let mut log_p = [vec![0.0; d], vec![0.0; d]];
        let mut log_q = [vec![0.0; d], vec![0.0; d]];
        for c in 0..2 {
            for j in 0..d {
                let p = (ones[c][j] + alpha) / (count[c] + 2.0 * alpha);
                log_p[c][j] = p.ln();
                log_q[c][j] = (1.0 - p).ln();
            }
        }
        let n = count[0] + count[1];
        let log_prior = [(count[0] / n).ln(), (count[1] / n).ln()];
        BernoulliNb { threshold, log_prior, log_p, log_q }
    }

    pub fn predict_proba(&self, x: &ArrayView2<f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|row| {
                let mut l = self.log_prior;
                for c in 0..2 {
                    for (j, &v) in row.iter().enumerate() {
                        l[c] += if v > self.threshold { self.log_p[c][j] } else { self.log_q[c][j] };
                    }
                }
                posterior(l)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn symmetric_classes_give_half_at_origin() {
        let x = array![[-2.0, -1.0], [-3.0, -2.0], [-1.0, -3.0], [2.0, 1.0], [3.0, 2.0], [1.0, 3.0]];
        let y = [false, false, false, true, true, true];
        let nb = GaussianNb::fit(x.view(), &y);
        let p = nb.predict_proba(&array![[0.0, 0.0]].view())[0];
        assert!((p - 0.5).abs() < 1e-9, "{p}");
        let far = nb.predict_proba(&array![[5.0, 5.0]].view())[0];
        assert!(far > 0.99);
    }

    #[test]
    fn soft_fit_with_hard_weights_matches_fit() {
        let x = array![[0.0], [1.0], [4.0], [5.0]];
        let y = [false, false, true, true];
        let a = GaussianNb::fit(x.view(), &y).predict_proba(&x.view());
        let b = GaussianNb::fit_soft(x.view(), &[0.0, 0.0, 1.0, 1.0]).predict_proba(&x.view());
        assert_eq!(a, b);
    }

    #[test]
    fn bernoulli_prefers_active_feature() {
        let x = array![[1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, 1.0]];
        let y = [true, true, false, false];
        let nb = BernoulliNb::fit(x.view(), &y, 0.0);
        let p = nb.predict_proba(&array![[1.0, -1.0], [-1.0, 1.0]].view());
        assert!(p[0] > 0.5 && p[1] < 0.5);
    }
}
