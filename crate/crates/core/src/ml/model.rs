use serde::{Deserialize, Serialize};

use super::boost::{fit_booster, BoostParams, Booster};
use super::ensemble::{fit_adaboost, fit_forest, forest_params, AdaAlgorithm, AdaBoost, Forest};
use super::tree::{fit_gini_tree, CartParams, MaxFeatures, SortedColumns, Splitter, Tree};
use super::{Deadline, MlError};
use crate::matrix::Matrix;
use crate::rng::stream;

/// Classifier hyper-parameters. Learning rates are stored in hundredths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierSpec {
    AdaBoost { algorithm: AdaAlgorithm, n_estimators: usize, learning_rate_centi: u32 },
    DecisionTree { max_depth: Option<usize>, min_samples_split: usize },
    ExtraTree { max_depth: Option<usize>, min_samples_split: usize },
    RandomForest { n_estimators: usize, max_depth: Option<usize>, min_samples_split: usize },
    ExtraTrees { n_estimators: usize, max_depth: Option<usize>, min_samples_split: usize },
    XGBoost { n_estimators: usize, max_depth: Option<usize>, max_leaves: usize, learning_rate_centi: u32 },
}

impl ClassifierSpec {
    /// Grammar terminal naming the algorithm.
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::AdaBoost { .. } => "AdaBoost",
            ClassifierSpec::DecisionTree { .. } => "DecisionTree",
            ClassifierSpec::ExtraTree { .. } => "ExtraTree",
            ClassifierSpec::RandomForest { .. } => "RandomForest",
            ClassifierSpec::ExtraTrees { .. } => "ExtraTrees",
            ClassifierSpec::XGBoost { .. } => "XGBoost",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Constant { proba: f64 },
    Tree(Tree),
    Forest(Forest),
    AdaBoost(AdaBoost),
    Booster(Booster),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub n_features: usize,
    pub model: Model,
}

impl Classifier {
    fn check(&self, x: &Matrix) -> Result<(), MlError> {
        if x.cols() != self.n_features {
            return Err(MlError::ColumnMismatch { expected: self.n_features, found: x.cols() });
        }
        Ok(())
    }

    pub fn proba_row(&self, row: &[f64]) -> f64 {
        let p = match &self.model {
            Model::Constant { proba } => *proba,
            Model::Tree(t) => t.leaf_value(row),
            Model::Forest(f) => f.proba(row),
            Model::AdaBoost(a) => a.proba(row),
            Model::Booster(b) => b.proba(row),
        };
        p.clamp(0.0, 1.0)
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>, MlError> {
        self.check(x)?;
        Ok((0..x.rows()).map(|r| self.proba_row(x.row(r))).collect())
    }

    /// Labels with `proba >= 0.5` mapped to class 1.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<u8>, MlError> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| u8::from(p >= 0.5)).collect())
    }
}

pub fn fit_classifier(
    spec: &ClassifierSpec,
    x: &Matrix,
    y: &[u8],
    seed: u64,
    deadline: Deadline,
) -> Result<Classifier, MlError> {
    if x.rows() == 0 || x.rows() != y.len() {
        return Err(MlError::EmptyInput);
    }
    deadline.check()?;
    let n_features = x.cols();
    let ones = y.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == y.len() {
        let proba = if ones == 0 { 0.0 } else { 1.0 };
        return Ok(Classifier { n_features, model: Model::Constant { proba } });
    }
    let cols = SortedColumns::new(x);
    let w = vec![1.0; y.len()];
    let mut rng = stream(seed, "classifier", 0, 0);
    let model = match *spec {
        ClassifierSpec::DecisionTree { max_depth, min_samples_split } => {
            let p = CartParams { max_depth, min_samples_split, splitter: Splitter::Best, max_features: MaxFeatures::All };
            Model::Tree(fit_gini_tree(&cols, y, &w, p, &mut rng, deadline)?)
        }
        ClassifierSpec::ExtraTree { max_depth, min_samples_split } => {
            let p = forest_params(max_depth, min_samples_split, Splitter::Random);
            Model::Tree(fit_gini_tree(&cols, y, &w, p, &mut rng, deadline)?)
        }
        ClassifierSpec::RandomForest { n_estimators, max_depth, min_samples_split } => {
            let p = forest_params(max_depth, min_samples_split, Splitter::Best);
            Model::Forest(fit_forest(&cols, y, n_estimators, p, true, seed, deadline)?)
        }
        ClassifierSpec::ExtraTrees { n_estimators, max_depth, min_samples_split } => {
            let p = forest_params(max_depth, min_samples_split, Splitter::Random);
            Model::Forest(fit_forest(&cols, y, n_estimators, p, false, seed, deadline)?)
        }
        ClassifierSpec::AdaBoost { algorithm, n_estimators, learning_rate_centi } => {
            let lr = f64::from(learning_rate_centi) / 100.0;
            Model::AdaBoost(fit_adaboost(&cols, x, y, algorithm, n_estimators, lr, seed, deadline)?)
        }
        ClassifierSpec::XGBoost { n_estimators, max_depth, max_leaves, learning_rate_centi } => {
            let p = BoostParams { n_estimators, max_depth, max_leaves, learning_rate: f64::from(learning_rate_centi) / 100.0 };
            Model::Booster(fit_booster(&cols, x, y, &p, deadline)?)
        }
    };
    Ok(Classifier { n_features, model })
}
