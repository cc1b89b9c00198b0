use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::{fit_classifier, Classifier};
use super::scale::{apply_scaler, fit_scaler, ScalerState};
use super::select::{apply_selector, fit_selector};
use super::spec::{PipelineSpec, SpecError};
use super::{Deadline, MlError};
use crate::chem::FeatureMatrix;
use crate::grammar::{parse_sentence, Grammar, GrammarError};
use crate::matrix::Matrix;

pub const DUMP_VERSION: u32 = 1;

#[derive(Debug)]
pub enum PipelineError {
    EmptyFeatureSet,
    Ml(MlError),
    Spec(SpecError),
    Grammar(GrammarError),
    ColumnNames,
    Dump(String),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::EmptyFeatureSet => f.write_str("feature selection kept no columns"),
            PipelineError::Ml(e) => write!(f, "{e}"),
            PipelineError::Spec(e) => write!(f, "{e}"),
            PipelineError::Grammar(e) => write!(f, "{e}"),
            PipelineError::ColumnNames => f.write_str("input columns differ from the training columns"),
            PipelineError::Dump(msg) => write!(f, "pipeline dump: {msg}"),
        }
    }
}

impl std::error::Error for PipelineError {}

impl From<MlError> for PipelineError {
    fn from(e: MlError) -> Self {
        PipelineError::Ml(e)
    }
}

/// A trained pipeline: scaler state, kept columns and classifier, plus the
/// sentence it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub version: u32,
    pub sentence: String,
    pub columns: Vec<String>,
    pub scaler: Option<ScalerState>,
    pub kept: Vec<usize>,
    pub classifier: Classifier,
}

impl FittedPipeline {
    /// Fits on an already featurized matrix whose columns are `columns`.
    pub fn fit_matrix(
        spec: &PipelineSpec,
        columns: &[String],
        x: &Matrix,
        y: &[u8],
        seed: u64,
        deadline: Deadline,
    ) -> Result<FittedPipeline, PipelineError> {
        let scaler = spec.scaler.map(|s| fit_scaler(s, x));
        let scaled = match &scaler {
            Some(s) => apply_scaler(s, x),
            None => x.clone(),
        };
        deadline.check()?;
        let kept = match spec.selector {
            Some(sel) => fit_selector(sel, &scaled, y)?,
            None => (0..x.cols()).collect(),
        };
        if kept.is_empty() {
            return Err(PipelineError::EmptyFeatureSet);
        }
        let selected = apply_selector(&kept, &scaled);
        let classifier = fit_classifier(&spec.classifier, &selected, y, seed, deadline)?;
        Ok(FittedPipeline {
            version: DUMP_VERSION,
            sentence: spec.sentence(),
            columns: columns.to_vec(),
            scaler,
            kept,
            classifier,
        })
    }

    pub fn fit(
        spec: &PipelineSpec,
        x: &FeatureMatrix,
        y: &[u8],
        seed: u64,
        deadline: Deadline,
    ) -> Result<FittedPipeline, PipelineError> {
        Self::fit_matrix(spec, &x.names, &x.data, y, seed, deadline)
    }

    pub fn spec(&self) -> Result<PipelineSpec, SpecError> {
        PipelineSpec::from_tokens(&self.sentence.split_whitespace().collect::<Vec<_>>())
    }

    fn transform(&self, x: &Matrix) -> Result<Matrix, PipelineError> {
        if x.cols() != self.columns.len() {
            return Err(MlError::ColumnMismatch { expected: self.columns.len(), found: x.cols() }.into());
        }
        let scaled = match &self.scaler {
            Some(s) => apply_scaler(s, x),
            None => x.clone(),
        };
        Ok(apply_selector(&self.kept, &scaled))
    }

    pub fn predict_proba_matrix(&self, x: &Matrix) -> Result<Vec<f64>, PipelineError> {
        Ok(self.classifier.predict_proba(&self.transform(x)?)?)
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Result<Vec<u8>, PipelineError> {
        Ok(self.classifier.predict(&self.transform(x)?)?)
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>, PipelineError> {
        if x.names != self.columns {
            return Err(PipelineError::ColumnNames);
        }
        self.predict_matrix(&x.data)
    }

    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>, PipelineError> {
        if x.names != self.columns {
            return Err(PipelineError::ColumnNames);
        }
        self.predict_proba_matrix(&x.data)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pipeline state serializes")
    }

    /// Loads a dump and re-validates its sentence against `grammar`.
    pub fn from_json(text: &str, grammar: &Grammar) -> Result<FittedPipeline, PipelineError> {
        let p: FittedPipeline = serde_json::from_str(text).map_err(|e| PipelineError::Dump(e.to_string()))?;
        if p.version != DUMP_VERSION {
            return Err(PipelineError::Dump(format!("unsupported version {}", p.version)));
        }
        let tokens: Vec<&str> = p.sentence.split_whitespace().collect();
        parse_sentence(grammar, &tokens).map_err(PipelineError::Grammar)?;
        p.spec().map_err(PipelineError::Spec)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{featurize, FeatureGroup, GroupSet};
    use crate::grammar::shipped::shipped;
    use crate::ml::{ClassifierSpec, ScalerSpec, SelectorSpec};

    fn data() -> (FeatureMatrix, Vec<u8>) {
        let smiles = ["CCO", "CCCO", "CCCCO", "CC", "CCC", "CCCC", "OCCO", "CCCCC"];
        let y = vec![1, 1, 1, 0, 0, 0, 1, 0];
        let g = GroupSet::from_groups(&[FeatureGroup::Fragments]).unwrap();
        (featurize(&smiles, g, 6).unwrap(), y)
    }

    fn spec(selector: Option<SelectorSpec>) -> PipelineSpec {
        PipelineSpec {
            groups: GroupSet::from_groups(&[FeatureGroup::Fragments]).unwrap(),
            scaler: Some(ScalerSpec::MinMax),
            selector,
            classifier: ClassifierSpec::DecisionTree { max_depth: None, min_samples_split: 2 },
        }
    }

    #[test]
    fn fit_predict_dump_load() {
        let (x, y) = data();
        let p = FittedPipeline::fit(&spec(None), &x, &y, 1, Deadline::none()).unwrap();
        assert_eq!(p.predict(&x).unwrap(), y);
        let back = FittedPipeline::from_json(&p.to_json(), shipped()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn empty_selection_is_reported() {
        let (x, y) = data();
        let s = spec(Some(SelectorSpec::VarianceThreshold { threshold_centi: 100 }));
        assert!(matches!(FittedPipeline::fit(&s, &x, &y, 1, Deadline::none()), Err(PipelineError::EmptyFeatureSet)));
    }

    #[test]
    fn load_rejects_foreign_sentence() {
        let (x, y) = data();
        let mut p = FittedPipeline::fit(&spec(None), &x, &y, 1, Deadline::none()).unwrap();
        p.sentence = "Fragments DecisionTree 99 2".into();
        assert!(matches!(FittedPipeline::from_json(&p.to_json(), shipped()), Err(PipelineError::Grammar(_))));
    }
}
