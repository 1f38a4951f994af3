use ndarray::{Array2, ArrayView2};

/// Uniform-weight k-nearest neighbours under Euclidean distance.
/// Equidistant neighbours are ordered by training index.
#[derive(Clone, Debug)]
pub struct Knn {
    k: usize,
    x: Array2<f64>,
    y: Vec<bool>,
}

impl Knn {
    pub fn fit(x: ArrayView2<f64>, y: &[bool], k: usize) -> Knn {
        Knn { k: k.max(1).min(y.len()), x: x.to_owned(), y: y.to_vec() }
    }

    pub fn predict_proba(&self, q: &ArrayView2<f64>) -> Vec<f64> {
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.y.len());
        q.rows()
            .into_iter()
            .map(|row| {
                dist.clear();
                for (i, t) in self.x.rows().into_iter().enumerate() {
                    let d: f64 = row.iter().zip(t.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                    dist.push((d, i));
                }
                let k = self.k;
                if k < dist.len() {
                    dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                }
                let pos = dist[..k].iter().filter(|&&(_, i)| self.y[i]).count();
                pos as f64 / k as f64
            })
            .collect()
    }
}
