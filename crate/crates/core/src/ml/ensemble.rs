//! Bagged forests and AdaBoost over decision stumps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{fit_gini_tree, CartParams, MaxFeatures, SortedColumns, Splitter, Tree};
use super::{sigmoid, Deadline, MlError};
use crate::matrix::Matrix;
use crate::rng::stream;

/// Probability floor applied before taking logs of stump probabilities.
pub const PROBA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Fraction of trees voting for class 1.
    pub fn proba(&self, row: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.5;
        }
        let votes = self.trees.iter().filter(|t| t.leaf_value(row) >= 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}

/// Fits `n_trees` CART trees; member `t` draws from its own index-derived
/// stream so the result is independent of training order.
pub(crate) fn fit_forest(
    cols: &SortedColumns,
    y: &[u8],
    n_trees: usize,
    params: CartParams,
    bootstrap: bool,
    seed: u64,
    deadline: Deadline,
) -> Result<Forest, MlError> {
    let n = cols.n;
    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        deadline.check()?;
        let mut rng = stream(seed, "forest-member", t as u64, 0);
        let mut w = vec![if bootstrap { 0.0 } else { 1.0 }; n];
        if bootstrap {
            for _ in 0..n {
                w[rng.gen_range(0..n)] += 1.0;
            }
        }
        trees.push(fit_gini_tree(cols, y, &w, params, &mut rng, deadline)?);
    }
    Ok(Forest { trees })
}

pub fn forest_params(max_depth: Option<usize>, min_samples_split: usize, splitter: Splitter) -> CartParams {
    CartParams { max_depth, min_samples_split, splitter, max_features: MaxFeatures::Sqrt }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdaAlgorithm {
    Samme,
    SammeR,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub algorithm: AdaAlgorithm,
    pub stumps: Vec<Tree>,
    /// Stump weights (SAMME); all one for SAMME.R.
    pub alphas: Vec<f64>,
}

impl AdaBoost {
    /// Signed margin: positive favours class 1.
    pub fn decision(&self, row: &[f64]) -> f64 {
        match self.algorithm {
            AdaAlgorithm::Samme => {
                let total: f64 = self.alphas.iter().sum();
                if total == 0.0 {
                    return 0.0;
                }
                let s: f64 = self
                    .stumps
                    .iter()
                    .zip(&self.alphas)
                    .map(|(t, a)| if t.leaf_value(row) >= 0.5 { *a } else { -*a })
                    .sum();
                s / total
            }
            AdaAlgorithm::SammeR => {
                if self.stumps.is_empty() {
                    return 0.0;
                }
                let s: f64 = self.stumps.iter().map(|t| real_margin(t.leaf_value(row))).sum();
                s / self.stumps.len() as f64
            }
        }
    }

    pub fn proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}

/// `ln p1 - ln p0` with both probabilities floored.
fn real_margin(p1: f64) -> f64 {
    p1.max(PROBA_FLOOR).ln() - (1.0 - p1).max(PROBA_FLOOR).ln()
}

const STUMP: CartParams =
    CartParams { max_depth: Some(1), min_samples_split: 2, splitter: Splitter::Best, max_features: MaxFeatures::All };

pub(crate) fn fit_adaboost(
    cols: &SortedColumns,
    x: &Matrix,
    y: &[u8],
    algorithm: AdaAlgorithm,
    n_estimators: usize,
    learning_rate: f64,
    seed: u64,
    deadline: Deadline,
) -> Result<AdaBoost, MlError> {
    let n = cols.n;
    let mut w = vec![1.0 / n as f64; n];
    let mut model = AdaBoost { algorithm, stumps: Vec::new(), alphas: Vec::new() };
    let mut rng = stream(seed, "adaboost", 0, 0);
    for _ in 0..n_estimators {
        deadline.check()?;
        let stump = fit_gini_tree(cols, y, &w, STUMP, &mut rng, deadline)?;
        let proba: Vec<f64> = (0..n).map(|r| stump.leaf_value(x.row(r))).collect();
        let wrong: Vec<bool> = proba.iter().zip(y).map(|(&p, &c)| u8::from(p >= 0.5) != c).collect();
        let wsum: f64 = w.iter().sum();
        let err: f64 = w.iter().zip(&wrong).filter(|(_, &x)| x).map(|(v, _)| v).sum::<f64>() / wsum;
        match algorithm {
            AdaAlgorithm::Samme => {
                if err <= 0.0 {
                    model.stumps.push(stump);
                    model.alphas.push(1.0);
                    break;
                }
                if err >= 0.5 {
                    if model.stumps.is_empty() {
                        model.stumps.push(stump);
                        model.alphas.push(1.0);
                    }
                    break;
                }
                let alpha = learning_rate * ((1.0 - err) / err).ln();
                for (wi, &bad) in w.iter_mut().zip(&wrong) {
                    if bad {
                        *wi *= alpha.exp();
                    }
                }
                model.stumps.push(stump);
                model.alphas.push(alpha);
            }
            AdaAlgorithm::SammeR => {
                for (i, wi) in w.iter_mut().enumerate() {
                    let m = real_margin(proba[i]);
                    let signed = if y[i] == 1 { m } else { -m };
                    let factor = -learning_rate * 0.5 * signed;
                    if *wi > 0.0 || factor < 0.0 {
                        *wi *= factor.exp();
                    }
                }
                model.stumps.push(stump);
                model.alphas.push(1.0);
                if err <= 0.0 {
                    break;
                }
            }
        }
        let total: f64 = w.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            break;
        }
        w.iter_mut().for_each(|v| *v /= total);
    }
    Ok(model)
}
