//! Binary decision trees and the Gini-impurity CART builder.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Deadline, MlError};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { value: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn constant(value: f64) -> Tree {
        Tree { nodes: vec![TreeNode::Leaf { value }] }
    }

    pub fn leaf_value(&self, row: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split { feature, threshold, left, right } => {
                    k = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, k: usize) -> usize {
            match &t.nodes[k] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }

    pub fn leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}

/// Feature matrix stored column-major with every column's row order
/// presorted once, so tree nodes can be split by stable partitioning.
pub(crate) struct SortedColumns {
    pub n: usize,
    pub p: usize,
    xt: Vec<f64>,
    order: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub fn new(x: &Matrix) -> SortedColumns {
        let (n, p) = (x.rows(), x.cols());
        let mut xt = vec![0.0; n * p];
        for r in 0..n {
            for (c, &v) in x.row(r).iter().enumerate() {
                xt[c * n + r] = v;
            }
        }
        let order = (0..p)
            .map(|c| {
                let col = &xt[c * n..(c + 1) * n];
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        SortedColumns { n, p, xt, order }
    }

    #[inline]
    pub fn value(&self, feature: usize, row: u32) -> f64 {
        self.xt[feature * self.n + row as usize]
    }

    /// Per-feature sorted lists restricted to rows passing `include`.
    pub fn lists(&self, include: impl Fn(u32) -> bool) -> Vec<Vec<u32>> {
        self.order.iter().map(|o| o.iter().copied().filter(|&r| include(r)).collect()).collect()
    }

    pub fn is_constant(&self, feature: usize, list: &[u32]) -> bool {
        match (list.first(), list.last()) {
            (Some(&a), Some(&b)) => self.value(feature, a) == self.value(feature, b),
            _ => true,
        }
    }

    /// Stable partition of every list by `left[row]`.
    pub fn partition(lists: Vec<Vec<u32>>, left: &[bool]) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
        let mut l = Vec::with_capacity(lists.len());
        let mut r = Vec::with_capacity(lists.len());
        for list in lists {
            let (a, b): (Vec<u32>, Vec<u32>) = list.into_iter().partition(|&i| left[i as usize]);
            l.push(a);
            r.push(b);
        }
        (l, r)
    }
}

/// Midpoint threshold between two consecutive distinct values, guarded so
/// it never rounds up to the larger value.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let t = lo + (hi - lo) / 2.0;
    if t >= hi || !t.is_finite() {
        lo
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitter {
    /// Exhaustive search over midpoints of consecutive distinct values.
    Best,
    /// One uniform random threshold per candidate feature.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    All,
    Sqrt,
}

impl MaxFeatures {
    pub fn count(self, p: usize) -> usize {
        match self {
            MaxFeatures::All => p,
            MaxFeatures::Sqrt => ((p as f64).sqrt() as usize).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CartParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub splitter: Splitter,
    pub max_features: MaxFeatures,
}

/// Weighted Gini proxy: larger means purer children.
#[inline]
fn purity(w0: f64, w1: f64) -> f64 {
    let w = w0 + w1;
    if w > 0.0 {
        (w0 * w0 + w1 * w1) / w
    } else {
        0.0
    }
}

struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
}

struct GiniBuilder<'a, R> {
    cols: &'a SortedColumns,
    y: &'a [u8],
    w: &'a [f64],
    params: CartParams,
    rng: &'a mut R,
    deadline: Deadline,
    nodes: Vec<TreeNode>,
    go_left: Vec<bool>,
}

impl<R: Rng> GiniBuilder<'_, R> {
    /// Candidate features in ascending order: all non-constant ones, or a
    /// random draw that skips constant features until enough are found.
    fn candidates(&mut self, lists: &[Vec<u32>], constant: impl Fn(&Self, usize, &[Vec<u32>]) -> bool) -> Vec<usize> {
        let p = self.cols.p;
        let want = self.params.max_features.count(p);
        let mut out = Vec::new();
        if want >= p {
            out.extend((0..p).filter(|&f| !constant(self, f, lists)));
        } else {
            let mut perm: Vec<usize> = (0..p).collect();
            perm.shuffle(self.rng);
            for f in perm {
                if out.len() == want {
                    break;
                }
                if !constant(self, f, lists) {
                    out.push(f);
                }
            }
            out.sort_unstable();
        }
        out
    }

    fn class_weights(&self, rows: &[u32]) -> (f64, f64) {
        rows.iter().fold((0.0, 0.0), |(a, b), &r| {
            let w = self.w[r as usize];
            if self.y[r as usize] == 1 {
                (a, b + w)
            } else {
                (a + w, b)
            }
        })
    }

    fn scan_best(&self, f: usize, list: &[u32], total: (f64, f64), best: &mut Option<Best>) {
        let (mut l0, mut l1) = (0.0, 0.0);
        for k in 0..list.len() - 1 {
            let r = list[k] as usize;
            if self.y[r] == 1 {
                l1 += self.w[r];
            } else {
                l0 += self.w[r];
            }
            let (a, b) = (self.cols.value(f, list[k]), self.cols.value(f, list[k + 1]));
            if a == b {
                continue;
            }
            let score = purity(l0, l1) + purity(total.0 - l0, total.1 - l1);
            if best.as_ref().is_none_or(|b| score > b.score) {
                *best = Some(Best { score, feature: f, threshold: midpoint(a, b) });
            }
        }
    }

    fn scan_threshold(&self, f: usize, rows: &[u32], threshold: f64, total: (f64, f64)) -> f64 {
        let (mut l0, mut l1) = (0.0, 0.0);
        for &r in rows {
            if self.cols.value(f, r) <= threshold {
                if self.y[r as usize] == 1 {
                    l1 += self.w[r as usize];
                } else {
                    l0 += self.w[r as usize];
                }
            }
        }
        purity(l0, l1) + purity(total.0 - l0, total.1 - l1)
    }

    fn leaf(&mut self, total: (f64, f64)) -> usize {
        let w = total.0 + total.1;
        let value = if w > 0.0 { total.1 / w } else { 0.5 };
        self.nodes.push(TreeNode::Leaf { value });
        self.nodes.len() - 1
    }

    /// `lists` holds one sorted list per feature (best splitter) or a single
    /// unsorted row list (random splitter).
    fn build(&mut self, lists: Vec<Vec<u32>>, depth: usize) -> Result<usize, MlError> {
        self.deadline.check()?;
        let rows = &lists[0];
        let total = self.class_weights(rows);
        let pure = total.0 == 0.0 || total.1 == 0.0;
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || rows.len() < self.params.min_samples_split.max(2) {
            return Ok(self.leaf(total));
        }
        let best = match self.params.splitter {
            Splitter::Best => {
                let cand = self.candidates(&lists, |s, f, l| s.cols.is_constant(f, &l[f]));
                let mut best = None;
                for f in cand {
                    self.scan_best(f, &lists[f], total, &mut best);
                }
                best
            }
            Splitter::Random => {
                let ranges: Vec<(f64, f64)> = (0..self.cols.p)
                    .map(|f| {
                        rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                            let v = self.cols.value(f, r);
                            (lo.min(v), hi.max(v))
                        })
                    })
                    .collect();
                let cand = self.candidates(&lists, |_, f, _| ranges[f].0 >= ranges[f].1);
                let mut best: Option<Best> = None;
                for f in cand {
                    let (lo, hi) = ranges[f];
                    let mut t = self.rng.gen_range(lo..hi);
                    if t >= hi {
                        t = lo;
                    }
                    let score = self.scan_threshold(f, rows, t, total);
                    if best.as_ref().is_none_or(|b| score > b.score) {
                        best = Some(Best { score, feature: f, threshold: t });
                    }
                }
                best
            }
        };
        let Some(best) = best else {
            return Ok(self.leaf(total));
        };
        for &r in rows {
            self.go_left[r as usize] = self.cols.value(best.feature, r) <= best.threshold;
        }
        let (left, right) = SortedColumns::partition(lists, &self.go_left);
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { value: 0.0 });
        let l = self.build(left, depth + 1)?;
        let r = self.build(right, depth + 1)?;
        self.nodes[id] = TreeNode::Split { feature: best.feature, threshold: best.threshold, left: l, right: r };
        Ok(id)
    }
}

/// Fits a Gini CART tree on rows with positive weight. Leaf values are the
/// weighted fraction of class 1.
pub(crate) fn fit_gini_tree<R: Rng>(
    cols: &SortedColumns,
    y: &[u8],
    w: &[f64],
    params: CartParams,
    rng: &mut R,
    deadline: Deadline,
) -> Result<Tree, MlError> {
    let lists = match params.splitter {
        Splitter::Best => cols.lists(|r| w[r as usize] > 0.0),
        Splitter::Random => vec![(0..cols.n as u32).filter(|&r| w[r as usize] > 0.0).collect()],
    };
    if lists.first().is_none_or(Vec::is_empty) {
        return Ok(Tree::constant(0.5));
    }
    let mut b = GiniBuilder {
        cols,
        y,
        w,
        params,
        rng,
        deadline,
        nodes: Vec::new(),
        go_left: vec![false; cols.n],
    };
    b.build(lists, 0)?;
    Ok(Tree { nodes: b.nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fit(x: &Matrix, y: &[u8], params: CartParams) -> Tree {
        let cols = SortedColumns::new(x);
        let w = vec![1.0; y.len()];
        fit_gini_tree(&cols, y, &w, params, &mut ChaCha8Rng::seed_from_u64(0), Deadline::none()).unwrap()
    }

    const BEST: CartParams =
        CartParams { max_depth: None, min_samples_split: 2, splitter: Splitter::Best, max_features: MaxFeatures::All };

    #[test]
    fn xor_depth_two() {
        let pts = [([0.0, 0.0], 0u8), ([0.0, 1.0], 1), ([1.0, 0.0], 1), ([1.0, 1.0], 0)];
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..25 {
            for (p, c) in pts {
                rows.push(p);
                y.push(c);
            }
        }
        let x = Matrix::from_rows(&rows);
        let t = fit(&x, &y, CartParams { max_depth: Some(2), ..BEST });
        for (r, &c) in y.iter().enumerate() {
            assert_eq!(u8::from(t.leaf_value(x.row(r)) >= 0.5), c);
        }
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn single_threshold_at_midpoint() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]);
        let t = fit(&x, &[0, 0, 1, 1], BEST);
        assert_eq!(t.nodes[0], TreeNode::Split { feature: 0, threshold: 2.5, left: 1, right: 2 });
    }

    #[test]
    fn ties_prefer_lower_feature() {
        let x = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]]);
        let t = fit(&x, &[0, 0, 1, 1], BEST);
        assert!(matches!(t.nodes[0], TreeNode::Split { feature: 0, .. }));
    }

    #[test]
    fn random_splitter_stays_in_range() {
        let x = Matrix::from_rows(&[[1.0, 5.0], [2.0, 5.0], [3.0, 5.0], [4.0, 5.0]]);
        let t = fit(&x, &[0, 1, 0, 1], CartParams { splitter: Splitter::Random, ..BEST });
        for n in &t.nodes {
            if let TreeNode::Split { feature, threshold, .. } = n {
                assert_eq!(*feature, 0);
                assert!((1.0..4.0).contains(threshold));
            }
        }
    }

    #[test]
    fn midpoint_guard() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        assert_eq!(midpoint(a, b), a);
        assert_eq!(midpoint(1.0, 2.0), 1.5);
    }
}
