//! Linear models: logistic regression (Newton), SGD log-loss, LDA and a
//! linear SVM with Platt scaling. All work on internally standardised inputs.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;

use crate::rng::rng_from_seed;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Scaler {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Scaler {
    pub(crate) fn fit(x: &ArrayView2<f64>) -> Scaler {
        let n = x.nrows() as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.columns() {
            let m = col.sum() / n;
            let sd = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
            mean.push(m);
            scale.push(if sd > 1e-12 { sd } else { 1.0 });
        }
        Scaler { mean, scale }
    }

    pub(crate) fn row(&self, x: &ArrayView2<f64>, i: usize) -> Vec<f64> {
        (0..self.mean.len()).map(|j| (x[[i, j]] - self.mean[j]) / self.scale[j]).collect()
    }

    fn all(&self, x: &ArrayView2<f64>) -> Vec<Vec<f64>> {
        (0..x.nrows()).map(|i| self.row(x, i)).collect()
    }
}

/// Solves `a x = b` for symmetric positive definite `a` (row-major, d x d) by
/// Cholesky, adding diagonal jitter if the factorisation fails.
pub(crate) fn solve_spd(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut jitter = 0.0;
    loop {
        if let Some(l) = cholesky(a, d, jitter) {
            let mut y = vec![0.0; d];
            for i in 0..d {
                let s: f64 = (0..i).map(|k| l[i * d + k] * y[k]).sum();
                y[i] = (b[i] - s) / l[i * d + i];
            }
            let mut x = vec![0.0; d];
            for i in (0..d).rev() {
                let s: f64 = (i + 1..d).map(|k| l[k * d + i] * x[k]).sum();
                x[i] = (y[i] - s) / l[i * d + i];
            }
            return x;
        }
        jitter = if jitter == 0.0 { 1e-10 } else { jitter * 10.0 };
        if jitter > 1e6 {
            return vec![0.0; d];
        }
    }
}

fn cholesky(a: &[f64], d: usize, jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            if i == j {
                s += jitter;
            }
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// `p = sigmoid(w . z + b)` on standardised inputs `z`.
#[derive(Clone, Debug)]
pub struct LinearModel {
    scaler: Scaler,
    w: Vec<f64>,
    b: f64,
    /// Optional Platt calibration `sigmoid(a * f + c)` of the raw score `f`.
    platt: Option<(f64, f64)>,
}

impl LinearModel {
    fn score(&self, z: &[f64]) -> f64 {
        self.w.iter().zip(z).map(|(w, z)| w * z).sum::<f64>() + self.b
    }

    pub fn predict_proba(&self, x: &ArrayView2<f64>) -> Vec<f64> {
        (0..x.nrows())
            .map(|i| {
                let f = self.score(&self.scaler.row(x, i));
                match self.platt {
                    Some((a, c)) => sigmoid(a * f + c),
                    None => sigmoid(f),
                }
            })
            .collect()
    }
}

/// L2-penalised (C = 1) logistic regression by Newton's method; the
/// intercept is not penalised.
pub fn fit_logistic(x: ArrayView2<f64>, y: &[bool]) -> LinearModel {
    let scaler = Scaler::fit(&x);
    let z = scaler.all(&x);
    let d = x.ncols() + 1;
    let mut beta = vec![0.0; d];
    for _ in 0..100 {
        let mut grad = vec![0.0; d];
        let mut hess = vec![0.0; d * d];
        for (zi, &yi) in z.iter().zip(y) {
            let f = beta[d - 1] + zi.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
            let p = sigmoid(f);
            let r = p - yi as u8 as f64;
            let s = (p * (1.0 - p)).max(1e-12);
            let xi = |k: usize| if k + 1 == d { 1.0 } else { zi[k] };
            for a in 0..d {
                grad[a] += r * xi(a);
                for b in 0..=a {
                    hess[a * d + b] += s * xi(a) * xi(b);
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                hess[b * d + a] = hess[a * d + b];
            }
        }
        for a in 0..d - 1 {
            grad[a] += beta[a];
            hess[a * d + a] += 1.0;
        }
        let step = solve_spd(&hess, &grad, d);
        let mut max_step = 0.0f64;
        for a in 0..d {
            beta[a] -= step[a];
            max_step = max_step.max(step[a].abs());
        }
        if max_step < 1e-9 {
            break;
        }
    }
    let b = beta.pop().unwrap_or(0.0);
    LinearModel { scaler, w: beta, b, platt: None }
}

/// Log-loss linear model trained by SGD (alpha = 1e-4, 50 shuffled epochs).
pub fn fit_sgd(x: ArrayView2<f64>, y: &[bool], seed: u64) -> LinearModel {
    let scaler = Scaler::fit(&x);
    let z = scaler.all(&x);
    let d = x.ncols();
    let alpha = 1e-4;
    let eta0 = 0.1;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..z.len()).collect();
    let mut rng = rng_from_seed(seed);
    let mut t = 0.0;
    for _ in 0..50 {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = eta0 / (1.0 + eta0 * alpha * t);
            let f = b + z[i].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            let g = sigmoid(f) - y[i] as u8 as f64;
            for k in 0..d {
                w[k] -= eta * (g * z[i][k] + alpha * w[k]);
            }
            b -= eta * g;
            t += 1.0;
        }
    }
    LinearModel { scaler, w, b, platt: None }
}

/// Two-class LDA with pooled covariance (lightly shrunk for stability).
pub fn fit_lda(x: ArrayView2<f64>, y: &[bool]) -> LinearModel {
    let scaler = Scaler::fit(&x);
    let z = scaler.all(&x);
    let d = x.ncols();
    let mut mean = [vec![0.0; d], vec![0.0; d]];
    let mut count = [0.0; 2];
    for (zi, &yi) in z.iter().zip(y) {
        let c = yi as usize;
        count[c] += 1.0;
        for k in 0..d {
            mean[c][k] += zi[k];
        }
    }
    for c in 0..2 {
        mean[c].iter_mut().for_each(|m| *m /= count[c]);
    }
    let mut cov = vec![0.0; d * d];
    for (zi, &yi) in z.iter().zip(y) {
        let m = &mean[yi as usize];
        for a in 0..d {
            for b in 0..d {
                cov[a * d + b] += (zi[a] - m[a]) * (zi[b] - m[b]);
            }
        }
    }
    let n = count[0] + count[1];
    let denom = (n - 2.0).max(1.0);
    let trace: f64 = (0..d).map(|a| cov[a * d + a]).sum::<f64>() / denom;
    for v in cov.iter_mut() {
        *v /= denom;
    }
    for a in 0..d {
        cov[a * d + a] += 1e-6 * (trace / d.max(1) as f64).max(1e-12);
    }
    let diff: Vec<f64> = (0..d).map(|k| mean[1][k] - mean[0][k]).collect();
    let w = solve_spd(&cov, &diff, d);
    let mid: f64 = (0..d).map(|k| 0.5 * (mean[1][k] + mean[0][k]) * w[k]).sum();
    let b = -mid + (count[1] / count[0]).ln();
    LinearModel { scaler, w, b, platt: None }
}

/// Linear SVM (hinge loss, C = 1) trained with Pegasos, calibrated by Platt
/// scaling on the training scores.
pub fn fit_svm(x: ArrayView2<f64>, y: &[bool], seed: u64) -> LinearModel {
    let scaler = Scaler::fit(&x);
    let z = scaler.all(&x);
    let n = z.len();
    let d = x.ncols();
    let lambda = 1.0 / n as f64;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_from_seed(seed);
    let mut t = 1.0f64;
    for _ in 0..50 {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = 1.0 / (lambda * (t + 100.0));
            let yi = if y[i] { 1.0 } else { -1.0 };
            let f = b + z[i].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            for v in w.iter_mut() {
                *v *= 1.0 - eta * lambda;
            }
            if yi * f < 1.0 {
                for k in 0..d {
                    w[k] += eta * yi * z[i][k];
                }
                b += eta * yi * 0.1;
            }
            t += 1.0;
        }
    }
    let mut model = LinearModel { scaler, w, b, platt: None };
    let scores: Vec<f64> = z.iter().map(|zi| model.score(zi)).collect();
    model.platt = Some(platt(&scores, y));
    model
}

/// Platt's sigmoid fit with regularised targets, by Newton iterations on (a, c).
fn platt(f: &[f64], y: &[bool]) -> (f64, f64) {
    let n_pos = y.iter().filter(|&&v| v).count() as f64;
    let n_neg = y.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let t: Vec<f64> = y.iter().map(|&v| if v { hi } else { lo }).collect();
    let (mut a, mut c) = (1.0, 0.0);
    for _ in 0..100 {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 1e-12, 0.0, 1e-12);
        for (fi, ti) in f.iter().zip(&t) {
            let p = sigmoid(a * fi + c);
            let r = p - ti;
            let s = p * (1.0 - p);
            g0 += r * fi;
            g1 += r;
            h00 += s * fi * fi;
            h01 += s * fi;
            h11 += s;
        }
        let det = h00 * h11 - h01 * h01;
        if det.abs() < 1e-300 {
            break;
        }
        let da = (h11 * g0 - h01 * g1) / det;
        let dc = (h00 * g1 - h01 * g0) / det;
        a -= da;
        c -= dc;
        if da.abs() + dc.abs() < 1e-10 {
            break;
        }
    }
    (a, c)
}
