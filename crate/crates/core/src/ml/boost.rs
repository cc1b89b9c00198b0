//! Second-order gradient boosting on the logistic loss.

use serde::{Deserialize, Serialize};

use super::tree::{midpoint, SortedColumns, Tree, TreeNode};
use super::{sigmoid, Deadline, MlError};
use crate::matrix::Matrix;

pub const LAMBDA: f64 = 1.0;
pub const MIN_CHILD_WEIGHT: f64 = 1.0;

/// Gradient and hessian of the logistic loss with respect to the margin.
pub fn logistic_grad_hess(margin: f64, y: f64) -> (f64, f64) {
    let p = sigmoid(margin);
    (p - y, p * (1.0 - p))
}

pub fn logistic_loss(margin: f64, y: f64) -> f64 {
    // log(1 + e^m) - y m, computed stably
    let softplus = if margin > 0.0 { margin + (-margin).exp().ln_1p() } else { margin.exp().ln_1p() };
    softplus - y * margin
}

pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + LAMBDA);
    0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    pub max_leaves: usize,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Booster {
    pub base_score: f64,
    /// Leaf values already include the learning rate.
    pub trees: Vec<Tree>,
}

impl Booster {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.leaf_value(row)).sum::<f64>()
    }

    pub fn proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }
}

struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct Frontier {
    node: usize,
    lists: Vec<Vec<u32>>,
    depth: usize,
    best: Option<Candidate>,
}

fn best_split(cols: &SortedColumns, lists: &[Vec<u32>], grad: &[f64], hess: &[f64], g: f64, h: f64) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for (f, list) in lists.iter().enumerate() {
        if cols.is_constant(f, list) {
            continue;
        }
        let (mut gl, mut hl) = (0.0, 0.0);
        for k in 0..list.len() - 1 {
            let r = list[k] as usize;
            gl += grad[r];
            hl += hess[r];
            let (a, b) = (cols.value(f, list[k]), cols.value(f, list[k + 1]));
            if a == b {
                continue;
            }
            let hr = h - hl;
            if hl < MIN_CHILD_WEIGHT || hr < MIN_CHILD_WEIGHT {
                continue;
            }
            let gain = split_gain(gl, hl, g - gl, hr);
            if gain > 0.0 && best.as_ref().is_none_or(|c| gain > c.gain) {
                best = Some(Candidate { gain, feature: f, threshold: midpoint(a, b) });
            }
        }
    }
    best
}

fn grow_tree(cols: &SortedColumns, grad: &[f64], hess: &[f64], params: &BoostParams) -> Tree {
    let sums = |list: &[u32]| list.iter().fold((0.0, 0.0), |(g, h), &r| (g + grad[r as usize], h + hess[r as usize]));
    let can_split = |depth: usize| params.max_depth.is_none_or(|d| depth < d) && params.max_leaves > 1;
    let leaf = |g: f64, h: f64| TreeNode::Leaf { value: -g / (h + LAMBDA) * params.learning_rate };

    let lists = cols.lists(|_| true);
    let (g, h) = sums(&lists[0]);
    let best = if can_split(0) { best_split(cols, &lists, grad, hess, g, h) } else { None };
    let mut nodes = vec![leaf(g, h)];
    let mut frontier = vec![Frontier { node: 0, lists, depth: 0, best }];
    let mut n_leaves = 1;
    let mut go_left = vec![false; cols.n];
    while n_leaves < params.max_leaves {
        // highest gain first; ties go to the earliest-created node
        let pick = frontier
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.best.as_ref().map(|b| (i, b.gain, f.node)))
            .fold(None, |acc: Option<(usize, f64, usize)>, c| match acc {
                Some(a) if a.1 > c.1 || (a.1 == c.1 && a.2 < c.2) => Some(a),
                _ => Some(c),
            });
        let Some((i, _, _)) = pick else { break };
        let leafnode = frontier.swap_remove(i);
        let split = leafnode.best.expect("picked nodes have a split");
        for &r in &leafnode.lists[0] {
            go_left[r as usize] = cols.value(split.feature, r) <= split.threshold;
        }
        let (l, r) = SortedColumns::partition(leafnode.lists, &go_left);
        let depth = leafnode.depth + 1;
        let mut child = |lists: Vec<Vec<u32>>, nodes: &mut Vec<TreeNode>| {
            let (g, h) = sums(&lists[0]);
            nodes.push(leaf(g, h));
            let best = if can_split(depth) { best_split(cols, &lists, grad, hess, g, h) } else { None };
            frontier.push(Frontier { node: nodes.len() - 1, lists, depth, best });
            nodes.len() - 1
        };
        let left = child(l, &mut nodes);
        let right = child(r, &mut nodes);
        nodes[leafnode.node] =
            TreeNode::Split { feature: split.feature, threshold: split.threshold, left, right };
        n_leaves += 1;
    }
    Tree { nodes }
}

pub(crate) fn fit_booster(
    cols: &SortedColumns,
    x: &Matrix,
    y: &[u8],
    params: &BoostParams,
    deadline: Deadline,
) -> Result<Booster, MlError> {
    let n = cols.n;
    let mut margin = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut model = Booster { base_score: 0.0, trees: Vec::with_capacity(params.n_estimators) };
    for _ in 0..params.n_estimators {
        deadline.check()?;
        for i in 0..n {
            (grad[i], hess[i]) = logistic_grad_hess(margin[i], f64::from(y[i]));
        }
        let tree = grow_tree(cols, &grad, &hess, params);
        for (i, m) in margin.iter_mut().enumerate() {
            *m += tree.leaf_value(x.row(i));
        }
        model.trees.push(tree);
    }
    Ok(model)
}
