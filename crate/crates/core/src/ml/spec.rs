//! Pipeline specifications and their grammar-sentence form.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ensemble::AdaAlgorithm;
use super::model::ClassifierSpec;
use super::scale::{Norm, ScalerSpec};
use super::select::SelectorSpec;
use crate::chem::{FeatureGroup, GroupSet};
use crate::grammar::DerivationTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub groups: GroupSet,
    pub scaler: Option<ScalerSpec>,
    pub selector: Option<SelectorSpec>,
    pub classifier: ClassifierSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecError {
    UnexpectedEnd,
    UnexpectedToken { position: usize, token: String },
    TrailingTokens { position: usize },
    NoFeatureGroups,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::UnexpectedEnd => f.write_str("sentence ended early"),
            SpecError::UnexpectedToken { position, token } => {
                write!(f, "unexpected token '{token}' at position {position}")
            }
            SpecError::TrailingTokens { position } => write!(f, "trailing tokens from position {position}"),
            SpecError::NoFeatureGroups => f.write_str("no feature groups"),
        }
    }
}

impl std::error::Error for SpecError {}

/// Formats hundredths as the grammar writes them: two decimals except for
/// the whole-number range ends (`0.0`, `1.0`, `2.0`).
fn centi(v: u32, short_ends: &[u32]) -> String {
    if short_ends.contains(&v) {
        format!("{}.0", v / 100)
    } else {
        format!("{}.{:02}", v / 100, v % 100)
    }
}

fn parse_centi(t: &str) -> Option<u32> {
    let (whole, frac) = t.split_once('.')?;
    let whole: u32 = whole.parse().ok()?;
    let frac = match frac.len() {
        1 => frac.parse::<u32>().ok()? * 10,
        2 => frac.parse::<u32>().ok()?,
        _ => return None,
    };
    Some(whole * 100 + frac)
}

fn depth_token(d: Option<usize>) -> String {
    d.map_or_else(|| "None".to_string(), |d| d.to_string())
}

fn bool_token(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

impl PipelineSpec {
    pub fn tokens(&self) -> Vec<String> {
        let mut out: Vec<String> = self.groups.groups().iter().map(|g| g.token().to_string()).collect();
        let mut push = |items: &[&str]| out.extend(items.iter().map(|s| s.to_string()));
        match self.scaler {
            None => {}
            Some(ScalerSpec::Normalizer(n)) => push(&["Normalizer", match n {
                Norm::L1 => "l1",
                Norm::L2 => "l2",
                Norm::Max => "max",
            }]),
            Some(ScalerSpec::MinMax) => push(&["MinMaxScaler"]),
            Some(ScalerSpec::MaxAbs) => push(&["MaxAbsScaler"]),
            Some(ScalerSpec::Robust { with_centering, with_scaling }) => {
                push(&["RobustScaler", bool_token(with_centering), bool_token(with_scaling)])
            }
            Some(ScalerSpec::Standard { with_mean, with_std }) => {
                push(&["StddScaler", bool_token(with_mean), bool_token(with_std)])
            }
        }
        match self.selector {
            None => {}
            Some(SelectorSpec::VarianceThreshold { threshold_centi }) => {
                push(&["VarianceThreshold", &centi(threshold_centi, &[0, 100])])
            }
            Some(SelectorSpec::Percentile { percentile }) => push(&["SelectPercentile", &percentile.to_string()]),
            Some(SelectorSpec::Fpr { alpha_centi }) => push(&["SelectFPR", &centi(alpha_centi, &[])]),
            Some(SelectorSpec::Fwe { alpha_centi }) => push(&["SelectFWE", &centi(alpha_centi, &[])]),
            Some(SelectorSpec::Fdr { alpha_centi }) => push(&["SelectFDR", &centi(alpha_centi, &[])]),
        }
        let lr = |v: u32| centi(v, &[200]);
        match self.classifier {
            ClassifierSpec::AdaBoost { algorithm, n_estimators, learning_rate_centi } => push(&[
                "AdaBoost",
                match algorithm {
                    AdaAlgorithm::Samme => "SAMME",
                    AdaAlgorithm::SammeR => "SAMME.R",
                },
                &n_estimators.to_string(),
                &lr(learning_rate_centi),
            ]),
            ClassifierSpec::DecisionTree { max_depth, min_samples_split } => {
                push(&["DecisionTree", &depth_token(max_depth), &min_samples_split.to_string()])
            }
            ClassifierSpec::ExtraTree { max_depth, min_samples_split } => {
                push(&["ExtraTree", &depth_token(max_depth), &min_samples_split.to_string()])
            }
            ClassifierSpec::RandomForest { n_estimators, max_depth, min_samples_split } => push(&[
                "RandomForest",
                &n_estimators.to_string(),
                &depth_token(max_depth),
                &min_samples_split.to_string(),
            ]),
            ClassifierSpec::ExtraTrees { n_estimators, max_depth, min_samples_split } => push(&[
                "ExtraTrees",
                &n_estimators.to_string(),
                &depth_token(max_depth),
                &min_samples_split.to_string(),
            ]),
            ClassifierSpec::XGBoost { n_estimators, max_depth, max_leaves, learning_rate_centi } => push(&[
                "XGBoost",
                &n_estimators.to_string(),
                &depth_token(max_depth),
                &max_leaves.to_string(),
                &lr(learning_rate_centi),
            ]),
        }
        out
    }

    /// Space-joined sentence.
    pub fn sentence(&self) -> String {
        self.tokens().join(" ")
    }

    /// Decodes a token sequence. Values are checked for shape, not for
    /// membership in a grammar's domains; use [`PipelineSpec::from_tree`]
    /// for a grammar-validated decode.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<PipelineSpec, SpecError> {
        let mut r = Reader { t: tokens, pos: 0 };
        let mut groups = Vec::new();
        while let Some(g) = r.peek().and_then(FeatureGroup::from_token) {
            groups.push(g);
            r.pos += 1;
        }
        let groups = GroupSet::from_groups(&groups).ok_or(SpecError::NoFeatureGroups)?;
        let scaler = match r.peek() {
            Some("Normalizer") => {
                r.pos += 1;
                let n = r.expect(|t| match t {
                    "l1" => Some(Norm::L1),
                    "l2" => Some(Norm::L2),
                    "max" => Some(Norm::Max),
                    _ => None,
                })?;
                Some(ScalerSpec::Normalizer(n))
            }
            Some("MinMaxScaler") => {
                r.pos += 1;
                Some(ScalerSpec::MinMax)
            }
            Some("MaxAbsScaler") => {
                r.pos += 1;
                Some(ScalerSpec::MaxAbs)
            }
            Some("RobustScaler") => {
                r.pos += 1;
                Some(ScalerSpec::Robust { with_centering: r.boolean()?, with_scaling: r.boolean()? })
            }
            Some("StddScaler") => {
                r.pos += 1;
                Some(ScalerSpec::Standard { with_mean: r.boolean()?, with_std: r.boolean()? })
            }
            _ => None,
        };
        let selector = match r.peek() {
            Some("VarianceThreshold") => {
                r.pos += 1;
                Some(SelectorSpec::VarianceThreshold { threshold_centi: r.expect(parse_centi)? })
            }
            Some("SelectPercentile") => {
                r.pos += 1;
                Some(SelectorSpec::Percentile { percentile: r.expect(|t| t.parse().ok())? })
            }
            Some("SelectFPR") => {
                r.pos += 1;
                Some(SelectorSpec::Fpr { alpha_centi: r.expect(parse_centi)? })
            }
            Some("SelectFWE") => {
                r.pos += 1;
                Some(SelectorSpec::Fwe { alpha_centi: r.expect(parse_centi)? })
            }
            Some("SelectFDR") => {
                r.pos += 1;
                Some(SelectorSpec::Fdr { alpha_centi: r.expect(parse_centi)? })
            }
            _ => None,
        };
        let name = r.expect(|t| Some(t.to_string()))?;
        let int = |r: &mut Reader<S>| r.expect(|t| t.parse::<usize>().ok());
        let depth = |r: &mut Reader<S>| {
            r.expect(|t| if t == "None" { Some(None) } else { t.parse::<usize>().ok().map(Some) })
        };
        let classifier = match name.as_str() {
            "AdaBoost" => ClassifierSpec::AdaBoost {
                algorithm: r.expect(|t| match t {
                    "SAMME" => Some(AdaAlgorithm::Samme),
                    "SAMME.R" => Some(AdaAlgorithm::SammeR),
                    _ => None,
                })?,
                n_estimators: int(&mut r)?,
                learning_rate_centi: r.expect(parse_centi)?,
            },
            "DecisionTree" => ClassifierSpec::DecisionTree { max_depth: depth(&mut r)?, min_samples_split: int(&mut r)? },
            "ExtraTree" => ClassifierSpec::ExtraTree { max_depth: depth(&mut r)?, min_samples_split: int(&mut r)? },
            "RandomForest" => ClassifierSpec::RandomForest {
                n_estimators: int(&mut r)?,
                max_depth: depth(&mut r)?,
                min_samples_split: int(&mut r)?,
            },
            "ExtraTrees" => ClassifierSpec::ExtraTrees {
                n_estimators: int(&mut r)?,
                max_depth: depth(&mut r)?,
                min_samples_split: int(&mut r)?,
            },
            "XGBoost" => ClassifierSpec::XGBoost {
                n_estimators: int(&mut r)?,
                max_depth: depth(&mut r)?,
                max_leaves: int(&mut r)?,
                learning_rate_centi: r.expect(parse_centi)?,
            },
            other => return Err(SpecError::UnexpectedToken { position: r.pos - 1, token: other.to_string() }),
        };
        if r.pos != tokens.len() {
            return Err(SpecError::TrailingTokens { position: r.pos });
        }
        Ok(PipelineSpec { groups, scaler, selector, classifier })
    }

    pub fn from_tree(tree: &DerivationTree) -> Result<PipelineSpec, SpecError> {
        Self::from_tokens(&tree.tokens())
    }
}

impl fmt::Display for PipelineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.sentence())
    }
}

struct Reader<'a, S> {
    t: &'a [S],
    pos: usize,
}

impl<S: AsRef<str>> Reader<'_, S> {
    fn peek(&self) -> Option<&str> {
        self.t.get(self.pos).map(AsRef::as_ref)
    }

    fn expect<T>(&mut self, f: impl FnOnce(&str) -> Option<T>) -> Result<T, SpecError> {
        let tok = self.peek().ok_or(SpecError::UnexpectedEnd)?;
        let v = f(tok).ok_or_else(|| SpecError::UnexpectedToken { position: self.pos, token: tok.to_string() })?;
        self.pos += 1;
        Ok(v)
    }

    fn boolean(&mut self) -> Result<bool, SpecError> {
        self.expect(|t| match t {
            "True" => Some(true),
            "False" => Some(false),
            _ => None,
        })
    }
}
