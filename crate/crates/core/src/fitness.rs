//! Stratified splitting, MCC scoring and budgeted pipeline evaluation.

use std::collections::HashMap;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::chem::{FeatureBlocks, FeatureMatrix, GroupSet, MoleculeGraph};
use crate::ml::pipeline::PipelineError;
use crate::ml::{Deadline, FittedPipeline, MlError, PipelineSpec};
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvalStatus {
    Ok,
    Timeout,
    EmptyFeatureSet,
    TrainFailure,
}

impl fmt::Display for EvalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalStatus::Ok => "ok",
            EvalStatus::Timeout => "timeout",
            EvalStatus::EmptyFeatureSet => "empty-feature-set",
            EvalStatus::TrainFailure => "train-failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub mean_mcc: f64,
    pub per_fold_mcc: Vec<f64>,
    pub status: EvalStatus,
    pub fold_seconds: Vec<f64>,
}

impl FitnessRecord {
    pub fn failure(status: EvalStatus) -> FitnessRecord {
        FitnessRecord { mean_mcc: 0.0, per_fold_mcc: Vec::new(), status, fold_seconds: Vec::new() }
    }

    pub fn from_folds(per_fold_mcc: Vec<f64>, fold_seconds: Vec<f64>) -> FitnessRecord {
        let mean_mcc =
            if per_fold_mcc.is_empty() { 0.0 } else { per_fold_mcc.iter().sum::<f64>() / per_fold_mcc.len() as f64 };
        FitnessRecord { mean_mcc, per_fold_mcc, status: EvalStatus::Ok, fold_seconds }
    }

    /// Equality ignoring timing.
    pub fn same_outcome(&self, other: &FitnessRecord) -> bool {
        self.status == other.status
            && self.mean_mcc.to_bits() == other.mean_mcc.to_bits()
            && self.per_fold_mcc.len() == other.per_fold_mcc.len()
            && self.per_fold_mcc.iter().zip(&other.per_fold_mcc).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FitnessError {
    LengthMismatch { expected: usize, found: usize },
    NonBinary { index: usize },
    SingleClass,
    ClassTooSmall { class: u8, size: usize, needed: usize },
    BadFraction,
}

impl fmt::Display for FitnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitnessError::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            FitnessError::NonBinary { index } => write!(f, "non-binary label at index {index}"),
            FitnessError::SingleClass => f.write_str("labels contain a single class"),
            FitnessError::ClassTooSmall { class, size, needed } => {
                write!(f, "class {class} has {size} samples, needs at least {needed}")
            }
            FitnessError::BadFraction => f.write_str("train fraction must lie strictly between 0 and 1"),
        }
    }
}

impl std::error::Error for FitnessError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionCounts, FitnessError> {
    if y_true.len() != y_pred.len() {
        return Err(FitnessError::LengthMismatch { expected: y_true.len(), found: y_pred.len() });
    }
    let mut c = ConfusionCounts::default();
    for (i, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        match (t, p) {
            (1, 1) => c.tp += 1,
            (0, 0) => c.tn += 1,
            (0, 1) => c.fp += 1,
            (1, 0) => c.fn_ += 1,
            _ => return Err(FitnessError::NonBinary { index: i }),
        }
    }
    Ok(c)
}

/// Matthews correlation coefficient; 0 when any marginal is empty.
pub fn mcc(c: &ConfusionCounts) -> f64 {
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if den == 0.0 {
        return 0.0;
    }
    ((tp * tn - fp * fn_) / den.sqrt()).clamp(-1.0, 1.0)
}

fn class_indices(labels: &[u8]) -> Result<[Vec<usize>; 2], FitnessError> {
    let mut by = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        match l {
            0 | 1 => by[l as usize].push(i),
            _ => return Err(FitnessError::NonBinary { index: i }),
        }
    }
    if by[0].is_empty() || by[1].is_empty() {
        return Err(FitnessError::SingleClass);
    }
    Ok(by)
}

/// Per-class `round(fraction * size)` samples go to train, the rest to the
/// blind set. Both returned index lists are sorted.
pub fn stratified_split(labels: &[u8], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), FitnessError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(FitnessError::BadFraction);
    }
    let by = class_indices(labels)?;
    let mut train = Vec::new();
    let mut blind = Vec::new();
    for (class, mut idx) in by.into_iter().enumerate() {
        if idx.len() < 2 {
            return Err(FitnessError::ClassTooSmall { class: class as u8, size: idx.len(), needed: 2 });
        }
        idx.shuffle(&mut stream(seed, "split", class as u64, 0));
        let k = (train_fraction * idx.len() as f64).round() as usize;
        train.extend_from_slice(&idx[..k]);
        blind.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    blind.sort_unstable();
    Ok((train, blind))
}

/// `k` disjoint validation folds covering every index. Each class is
/// shuffled and dealt round-robin, continuing the dealing position from the
/// previous class so fold totals stay balanced.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, FitnessError> {
    let by = class_indices(labels)?;
    let mut folds = vec![Vec::new(); k];
    let mut pos = 0;
    for (class, mut idx) in by.into_iter().enumerate() {
        if idx.len() < k {
            return Err(FitnessError::ClassTooSmall { class: class as u8, size: idx.len(), needed: k });
        }
        idx.shuffle(&mut stream(seed, "kfold", class as u64, 0));
        for i in idx {
            folds[pos % k].push(i);
            pos += 1;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// A K-fold partition of the training rows with an identity used by the
/// fitness cache.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSet {
    pub id: u64,
    pub folds: Vec<Vec<usize>>,
}

impl FoldSet {
    /// Draws fold set number `id` for a master seed.
    pub fn draw(labels: &[u8], k: usize, master_seed: u64, id: u64) -> Result<FoldSet, FitnessError> {
        let folds = stratified_kfold(labels, k, derive_seed(master_seed, "foldset", id, 0))?;
        Ok(FoldSet { id, folds })
    }

    pub fn train_indices(&self, fold: usize, n: usize) -> Vec<usize> {
        let mut val = vec![false; n];
        self.folds[fold].iter().for_each(|&i| val[i] = true);
        (0..n).filter(|&i| !val[i]).collect()
    }
}

/// Training-split data: labels plus per-group feature blocks computed once.
pub struct TrainData {
    pub y: Vec<u8>,
    blocks: FeatureBlocks,
    assembled: Mutex<HashMap<GroupSet, Arc<FeatureMatrix>>>,
}

impl TrainData {
    pub fn new(molecules: &[MoleculeGraph], y: Vec<u8>, max_distance: usize) -> TrainData {
        assert_eq!(molecules.len(), y.len(), "labels must align with molecules");
        TrainData {
            y,
            blocks: FeatureBlocks::compute(molecules, GroupSet::all(), max_distance),
            assembled: Mutex::new(HashMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Feature matrix for a group subset, assembled once and shared.
    pub fn features(&self, groups: GroupSet) -> Arc<FeatureMatrix> {
        if let Some(m) = self.assembled.lock().unwrap().get(&groups) {
            return m.clone();
        }
        let m = Arc::new(self.blocks.assemble(groups));
        self.assembled.lock().unwrap().entry(groups).or_insert(m).clone()
    }
}

/// Status a pipeline error is scored under.
pub fn status_of(e: &PipelineError) -> EvalStatus {
    match e {
        PipelineError::EmptyFeatureSet => EvalStatus::EmptyFeatureSet,
        PipelineError::Ml(MlError::DeadlineExceeded) => EvalStatus::Timeout,
        _ => EvalStatus::TrainFailure,
    }
}

/// K-fold MCC of a pipeline on the training split. Never fails: problems
/// are encoded in the record status with a zero score.
pub fn evaluate_pipeline(
    spec: &PipelineSpec,
    data: &TrainData,
    folds: &FoldSet,
    budget: Duration,
    master_seed: u64,
) -> FitnessRecord {
    let start = Instant::now();
    if budget.is_zero() {
        return FitnessRecord::failure(EvalStatus::Timeout);
    }
    let deadline = Deadline::at(start + budget);
    let run = || {
        let x = data.features(spec.groups);
        let n = data.len();
        let mut per_fold = Vec::with_capacity(folds.folds.len());
        let mut seconds = Vec::with_capacity(folds.folds.len());
        for (k, val) in folds.folds.iter().enumerate() {
            let t0 = Instant::now();
            let train = folds.train_indices(k, n);
            let ytr: Vec<u8> = train.iter().map(|&i| data.y[i]).collect();
            let yva: Vec<u8> = val.iter().map(|&i| data.y[i]).collect();
            let seed = derive_seed(master_seed, "fit", folds.id, k as u64);
            let fitted = FittedPipeline::fit_matrix(spec, &x.names, &x.data.select_rows(&train), &ytr, seed, deadline)
                .map_err(|e| status_of(&e))?;
            let pred = fitted.predict_matrix(&x.data.select_rows(val)).map_err(|e| status_of(&e))?;
            let c = confusion(&yva, &pred).map_err(|_| EvalStatus::TrainFailure)?;
            per_fold.push(mcc(&c));
            seconds.push(t0.elapsed().as_secs_f64());
            if deadline.expired() {
                return Err(EvalStatus::Timeout);
            }
        }
        Ok(FitnessRecord::from_folds(per_fold, seconds))
    };
    match catch_unwind(AssertUnwindSafe(run)) {
        Ok(Ok(r)) => r,
        Ok(Err(status)) => FitnessRecord::failure(status),
        Err(_) => FitnessRecord::failure(EvalStatus::TrainFailure),
    }
}

/// Memoized fitness keyed by (canonical sentence, fold-set id).
#[derive(Default)]
pub struct FitnessCache {
    map: Mutex<HashMap<(String, u64), FitnessRecord>>,
}

impl FitnessCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, sentence: &str, foldset: u64) -> Option<FitnessRecord> {
        self.map.lock().unwrap().get(&(sentence.to_string(), foldset)).cloned()
    }

    /// Inserts unless present; the first stored record wins.
    pub fn insert(&self, sentence: &str, foldset: u64, record: FitnessRecord) -> FitnessRecord {
        self.map.lock().unwrap().entry((sentence.to_string(), foldset)).or_insert(record).clone()
    }

    /// Drops every entry not belonging to `foldset`.
    pub fn retain_foldset(&self, foldset: u64) {
        self.map.lock().unwrap().retain(|(_, f), _| *f == foldset);
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_examples() {
        assert_eq!(confusion(&[1, 0], &[1, 0]).unwrap(), ConfusionCounts { tp: 1, tn: 1, fp: 0, fn_: 0 });
        assert_eq!(confusion(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap(), ConfusionCounts { tp: 1, tn: 1, fp: 1, fn_: 1 });
        let c = confusion(&[1, 0, 1], &[0, 1, 0]).unwrap();
        assert_eq!((c.tp, c.tn), (0, 0));
        assert_eq!(confusion(&[1], &[1, 0]), Err(FitnessError::LengthMismatch { expected: 1, found: 2 }));
        assert_eq!(confusion(&[2], &[1]), Err(FitnessError::NonBinary { index: 0 }));
    }

    #[test]
    fn mcc_examples() {
        assert_eq!(mcc(&ConfusionCounts { tp: 5, tn: 5, fp: 0, fn_: 0 }), 1.0);
        assert_eq!(mcc(&ConfusionCounts { tp: 0, tn: 0, fp: 5, fn_: 5 }), -1.0);
        let v = mcc(&ConfusionCounts { tp: 3, tn: 4, fp: 2, fn_: 1 });
        assert!((v - 10.0 / 600f64.sqrt()).abs() < 1e-15);
        assert_eq!(mcc(&ConfusionCounts { tp: 4, tn: 0, fp: 6, fn_: 0 }), 0.0);
    }

    #[test]
    fn split_examples() {
        let labels: Vec<u8> = [vec![0; 10], vec![1; 10]].concat();
        let (train, blind) = stratified_split(&labels, 0.9, 3).unwrap();
        assert_eq!((train.len(), blind.len()), (18, 2));
        assert_eq!(blind.iter().filter(|&&i| labels[i] == 1).count(), 1);
        let small = [0, 0, 0, 0, 1, 1];
        let (train, _) = stratified_split(&small, 0.5, 0).unwrap();
        assert_eq!(train.iter().filter(|&&i| small[i] == 0).count(), 2);
        assert_eq!(train.iter().filter(|&&i| small[i] == 1).count(), 1);
        assert_eq!(stratified_split(&[0, 0], 0.9, 0), Err(FitnessError::SingleClass));
        assert!(matches!(stratified_split(&[0, 0, 1], 0.9, 0), Err(FitnessError::ClassTooSmall { class: 1, .. })));
    }

    #[test]
    fn kfold_examples() {
        let labels: Vec<u8> = (0..10).map(|i| (i % 2) as u8).collect();
        let folds = stratified_kfold(&labels, 5, 9).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 2);
            assert_eq!(f.iter().filter(|&&i| labels[i] == 1).count(), 1);
        }
        assert_eq!(folds, stratified_kfold(&labels, 5, 9).unwrap());
        assert!(matches!(stratified_kfold(&[0, 0, 0, 1], 2, 0), Err(FitnessError::ClassTooSmall { .. })));
    }

    #[test]
    fn cache_semantics() {
        let c = FitnessCache::new();
        let r = FitnessRecord::from_folds(vec![0.5, 0.7], vec![0.0, 0.0]);
        assert!(c.get("s", 0).is_none());
        c.insert("s", 0, r.clone());
        assert_eq!(c.get("s", 0), Some(r.clone()));
        assert!(c.get("s", 1).is_none());
        c.insert("s", 1, r);
        c.retain_foldset(1);
        assert_eq!(c.len(), 1);
    }
}
