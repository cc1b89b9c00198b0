//! Scalers, univariate selectors and the six pipeline classifiers.

use std::fmt;
use std::time::{Duration, Instant};

pub mod boost;
pub mod ensemble;
pub mod model;
pub mod pipeline;
pub mod scale;
pub mod select;
pub mod spec;
pub mod tree;

pub use model::{fit_classifier, Classifier, ClassifierSpec, Model};
pub use pipeline::FittedPipeline;
pub use scale::{apply_scaler, fit_scaler, Norm, ScalerSpec, ScalerState};
pub use select::{apply_selector, f_oneway, fit_selector, SelectorSpec};
pub use spec::{PipelineSpec, SpecError};

#[derive(Debug, Clone, PartialEq)]
pub enum MlError {
    DeadlineExceeded,
    ColumnMismatch { expected: usize, found: usize },
    EmptyInput,
    SingleClass,
}

impl fmt::Display for MlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MlError::DeadlineExceeded => f.write_str("deadline exceeded"),
            MlError::ColumnMismatch { expected, found } => {
                write!(f, "expected {expected} columns, found {found}")
            }
            MlError::EmptyInput => f.write_str("empty input"),
            MlError::SingleClass => f.write_str("labels contain a single class"),
        }
    }
}

impl std::error::Error for MlError {}

/// Cooperative wall-clock limit polled between trees, rounds and splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Deadline(None)
    }

    pub fn after(d: Duration) -> Self {
        Deadline(Instant::now().checked_add(d))
    }

    pub fn at(t: Instant) -> Self {
        Deadline(Some(t))
    }

    pub fn expired(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }

    pub fn check(&self) -> Result<(), MlError> {
        if self.expired() {
            Err(MlError::DeadlineExceeded)
        } else {
            Ok(())
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
