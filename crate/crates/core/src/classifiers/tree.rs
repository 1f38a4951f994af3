//! Weighted CART trees.
//!
//! A single implementation serves both regression and binary classification:
//! on 0/1 targets the weighted Gini impurity `2p(1 - p)` is twice the weighted
//! variance, so variance-reduction splits are exactly Gini splits and the
//! leaf mean is the positive-class probability.

use ndarray::ArrayView2;
use rand::Rng as _;

use crate::rng::Rng;

/// Column-major copy of a feature matrix, built once per ensemble fit.
#[derive(Clone, Debug)]
pub struct Columns {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl Columns {
    pub fn from_view(x: ArrayView2<f64>) -> Self {
        let (n_rows, n_cols) = x.dim();
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for j in 0..n_cols {
            data.extend(x.column(j).iter().copied());
        }
        Columns { data, n_rows, n_cols }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.n_rows + row]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaxFeatures {
    All,
    Sqrt,
    /// One third of the features, at least one.
    Third,
    Fixed(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::Third => n_features / 3,
            MaxFeatures::Fixed(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Splitter {
    /// Exhaustive search over midpoints between consecutive distinct values.
    Best,
    /// One uniformly drawn threshold per candidate feature (extremely randomised trees).
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub splitter: Splitter,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_features: MaxFeatures::All,
            splitter: Splitter::Best,
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug)]
pub struct Tree {
    nodes: Vec<Node>,
}

#[derive(Clone, Copy)]
struct Stats {
    w: f64,
    wy: f64,
    count: usize,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Tree {
    /// Fits a tree on rows with positive weight.
    ///
    /// Rows with weight zero are ignored, which is how bootstrap samples are
    /// expressed (weight = draw multiplicity).
    pub fn fit(cols: &Columns, y: &[f64], w: &[f64], params: &TreeParams, rng: &mut Rng) -> Tree {
        debug_assert_eq!(cols.n_rows(), y.len());
        debug_assert_eq!(y.len(), w.len());
        let mut rows: Vec<usize> = (0..y.len()).filter(|&i| w[i] > 0.0).collect();
        let mut builder = Builder {
            cols,
            y,
            w,
            params,
            n_try: params.max_features.resolve(cols.n_cols()),
            nodes: Vec::new(),
            scratch: Vec::with_capacity(rows.len()),
            order: (0..cols.n_cols()).collect(),
        };
        if rows.is_empty() {
            return Tree { nodes: vec![Node::Leaf { value: 0.0 }] };
        }
        builder.nodes.push(Node::Leaf { value: 0.0 });
        let mut stack = vec![(0usize, 0usize, rows.len(), 0usize)];
        while let Some((node, start, end, depth)) = stack.pop() {
            let slice = &mut rows[start..end];
            let stats = builder.stats(slice);
            let value = if stats.w > 0.0 { stats.wy / stats.w } else { 0.0 };
            builder.nodes[node] = Node::Leaf { value };
            if !builder.splittable(slice, &stats, depth) {
                continue;
            }
            let Some(best) = builder.best_split(slice, &stats, rng) else {
                continue;
            };
            let col = cols.column(best.feature);
            let mid = partition(slice, |&r| col[r] <= best.threshold);
            let left = builder.nodes.len();
            builder.nodes.push(Node::Leaf { value });
            builder.nodes.push(Node::Leaf { value });
            builder.nodes[node] =
                Node::Split { feature: best.feature, threshold: best.threshold, left, right: left + 1 };
            stack.push((left + 1, start + mid, end, depth + 1));
            stack.push((left, start, start + mid, depth + 1));
        }
        Tree { nodes: builder.nodes }
    }

    fn leaf_of(&self, get: impl Fn(usize) -> f64) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { feature, threshold, left, right } => {
                    i = if get(*feature) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Index of the leaf reached by row `row` of `x`.
    pub fn leaf_index(&self, x: &ArrayView2<f64>, row: usize) -> usize {
        self.leaf_of(|f| x[[row, f]])
    }

    pub fn predict_row(&self, x: &ArrayView2<f64>, row: usize) -> f64 {
        match self.nodes[self.leaf_index(x, row)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn predict_columns(&self, cols: &Columns, row: usize) -> f64 {
        match self.nodes[self.leaf_of(|f| cols.get(row, f))] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn predict(&self, x: &ArrayView2<f64>) -> Vec<f64> {
        (0..x.nrows()).map(|i| self.predict_row(x, i)).collect()
    }

    /// Overwrites a leaf value (used by boosting for Newton leaf updates).
    pub fn set_leaf_value(&mut self, leaf: usize, v: f64) {
        if let Node::Leaf { value } = &mut self.nodes[leaf] {
            *value = v;
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

/// Stable-order-free in-place partition; returns the number of `true` rows.
fn partition(rows: &mut [usize], pred: impl Fn(&usize) -> bool) -> usize {
    let mut i = 0;
    for j in 0..rows.len() {
        if pred(&rows[j]) {
            rows.swap(i, j);
            i += 1;
        }
    }
    i
}

struct Builder<'a> {
    cols: &'a Columns,
    y: &'a [f64],
    w: &'a [f64],
    params: &'a TreeParams,
    n_try: usize,
    nodes: Vec<Node>,
    scratch: Vec<(f64, usize)>,
    order: Vec<usize>,
}

impl Builder<'_> {
    fn stats(&self, rows: &[usize]) -> Stats {
        let mut s = Stats { w: 0.0, wy: 0.0, count: rows.len() };
        for &r in rows {
            s.w += self.w[r];
            s.wy += self.w[r] * self.y[r];
        }
        s
    }

    fn splittable(&self, rows: &[usize], stats: &Stats, depth: usize) -> bool {
        if stats.count < self.params.min_samples_split.max(2)
            || stats.count < 2 * self.params.min_samples_leaf.max(1)
        {
            return false;
        }
        if self.params.max_depth.is_some_and(|d| depth >= d) {
            return false;
        }
        let first = self.y[rows[0]];
        rows.iter().any(|&r| (self.y[r] - first).abs() > 1e-12)
    }

    fn best_split(&mut self, rows: &[usize], stats: &Stats, rng: &mut Rng) -> Option<Candidate> {
        let n_features = self.cols.n_cols();
        let shuffle = self.n_try < n_features || self.params.splitter == Splitter::Random;
        if !shuffle {
            for (i, slot) in self.order.iter_mut().enumerate() {
                *slot = i;
            }
        }
        let parent = stats.wy * stats.wy / stats.w;
        let mut best: Option<Candidate> = None;
        let mut visited = 0usize;
        for pos in 0..n_features {
            if shuffle {
                let j = rng.random_range(pos..n_features);
                self.order.swap(pos, j);
            }
            if visited >= self.n_try && best.is_some() {
                break;
            }
            let feature = self.order[pos];
            let found = match self.params.splitter {
                Splitter::Best => self.best_threshold(rows, stats, feature),
                Splitter::Random => self.random_threshold(rows, stats, feature, rng),
            };
            let Some((threshold, score)) = found else {
                continue;
            };
            visited += 1;
            let gain = score - parent;
            if gain <= 1e-12 * parent.abs().max(1e-12) {
                continue;
            }
            if best.as_ref().is_none_or(|b| score > b.score) {
                best = Some(Candidate { feature, threshold, score });
            }
        }
        best
    }

    /// Best midpoint threshold for `feature`; `None` when the feature is constant.
    /// The score is `S_L^2 / W_L + S_R^2 / W_R`, maximised.
    fn best_threshold(&mut self, rows: &[usize], stats: &Stats, feature: usize) -> Option<(f64, f64)> {
        let col = self.cols.column(feature);
        self.scratch.clear();
        self.scratch.extend(rows.iter().map(|&r| (col[r], r)));
        self.scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = self.scratch.len();
        if self.scratch[0].0 == self.scratch[n - 1].0 {
            return None;
        }
        let min_leaf = self.params.min_samples_leaf.max(1);
        let (mut wl, mut sl) = (0.0, 0.0);
        let mut best: Option<(f64, f64)> = None;
        for i in 0..n - 1 {
            let (xv, r) = self.scratch[i];
            wl += self.w[r];
            sl += self.w[r] * self.y[r];
            let next = self.scratch[i + 1].0;
            if xv == next || i + 1 < min_leaf || n - i - 1 < min_leaf {
                continue;
            }
            let wr = stats.w - wl;
            if wl <= 0.0 || wr <= 0.0 {
                continue;
            }
            let sr = stats.wy - sl;
            let score = sl * sl / wl + sr * sr / wr;
            if best.is_none_or(|(_, s)| score > s) {
                let mut t = 0.5 * (xv + next);
                if t >= next {
                    t = xv;
                }
                best = Some((t, score));
            }
        }
        best
    }

    fn random_threshold(
        &mut self,
        rows: &[usize],
        stats: &Stats,
        feature: usize,
        rng: &mut Rng,
    ) -> Option<(f64, f64)> {
        let col = self.cols.column(feature);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &r in rows {
            lo = lo.min(col[r]);
            hi = hi.max(col[r]);
        }
        if hi <= lo {
            return None;
        }
        let mut t = rng.random_range(lo..hi);
        if t >= hi {
            t = lo;
        }
        let (mut wl, mut sl, mut nl) = (0.0, 0.0, 0usize);
        for &r in rows {
            if col[r] <= t {
                wl += self.w[r];
                sl += self.w[r] * self.y[r];
                nl += 1;
            }
        }
        let min_leaf = self.params.min_samples_leaf.max(1);
        let wr = stats.w - wl;
        if nl < min_leaf || rows.len() - nl < min_leaf || wl <= 0.0 || wr <= 0.0 {
            return None;
        }
        let sr = stats.wy - sl;
        Some((t, sl * sl / wl + sr * sr / wr))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use ndarray::array;

    #[test]
    fn separable_one_feature_is_learned_exactly() {
        let x = array![[0.0], [1.0], [2.0], [3.0], [10.0], [11.0], [12.0]];
        let y = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let w = [1.0; 7];
        let tree = Tree::fit(&Columns::from_view(x.view()), &y, &w, &TreeParams::default(), &mut rng_from_seed(0));
        assert_eq!(tree.predict(&x.view()), y.to_vec());
        assert_eq!(tree.n_leaves(), 2);
        assert_eq!(tree.predict(&array![[6.4], [6.6]].view()), vec![0.0, 1.0]);
    }

    #[test]
    fn constant_target_gives_single_leaf() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [2.0, 5.0]];
        let y = [0.7; 3];
        let tree = Tree::fit(&Columns::from_view(x.view()), &y, &[1.0; 3], &TreeParams::default(), &mut rng_from_seed(0));
        assert_eq!(tree.n_leaves(), 1);
        assert!(tree.predict(&x.view()).iter().all(|&p| (p - 0.7).abs() < 1e-12));
    }

    #[test]
    fn zero_weight_rows_are_ignored() {
        let x = array![[0.0], [1.0], [2.0]];
        let y = [0.0, 1.0, 1.0];
        let w = [0.0, 1.0, 1.0];
        let tree = Tree::fit(&Columns::from_view(x.view()), &y, &w, &TreeParams::default(), &mut rng_from_seed(0));
        assert_eq!(tree.n_leaves(), 1);
        assert_eq!(tree.predict_row(&x.view(), 0), 1.0);
    }

    #[test]
    fn max_depth_and_min_leaf_are_respected() {
        let x = ndarray::Array2::from_shape_fn((64, 1), |(i, _)| i as f64);
        let y: Vec<f64> = (0..64).map(|i| (i % 2) as f64).collect();
        let params = TreeParams { max_depth: Some(3), ..TreeParams::default() };
        let tree = Tree::fit(&Columns::from_view(x.view()), &y, &[1.0; 64], &params, &mut rng_from_seed(0));
        assert!(tree.depth() <= 3);
        let params = TreeParams { min_samples_leaf: 20, ..TreeParams::default() };
        let tree = Tree::fit(&Columns::from_view(x.view()), &y, &[1.0; 64], &params, &mut rng_from_seed(0));
        assert!(tree.n_leaves() <= 3);
    }

    #[test]
    fn ties_pick_first_feature() {
        // Both features separate the classes identically.
        let x = array![[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 6.0]];
        let y = [0.0, 0.0, 1.0, 1.0];
        let tree = Tree::fit(&Columns::from_view(x.view()), &y, &[1.0; 4], &TreeParams::default(), &mut rng_from_seed(0));
        match &tree.nodes[0] {
            Node::Split { feature, .. } => assert_eq!(*feature, 0),
            Node::Leaf { .. } => panic!("expected a split"),
        }
    }
}
