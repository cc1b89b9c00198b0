use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalerSpec {
    Normalizer(Norm),
    MinMax,
    MaxAbs,
    Robust { with_centering: bool, with_scaling: bool },
    Standard { with_mean: bool, with_std: bool },
}

/// Fitted scaler: row-wise normalization or the column-wise map `(x - shift) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScalerState {
    Normalizer(Norm),
    Affine { shift: Vec<f64>, scale: Vec<f64> },
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn nonzero(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        1.0
    } else {
        x
    }
}

pub fn fit_scaler(spec: ScalerSpec, x: &Matrix) -> ScalerState {
    let p = x.cols();
    let columns = || (0..p).map(|c| x.column(c));
    let (shift, scale): (Vec<f64>, Vec<f64>) = match spec {
        ScalerSpec::Normalizer(n) => return ScalerState::Normalizer(n),
        ScalerSpec::MinMax => columns()
            .map(|col| {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if col.is_empty() {
                    (0.0, 1.0)
                } else {
                    (lo, nonzero(hi - lo))
                }
            })
            .unzip(),
        ScalerSpec::MaxAbs => columns()
            .map(|col| (0.0, nonzero(col.iter().fold(0.0f64, |m, v| m.max(v.abs())))))
            .unzip(),
        ScalerSpec::Robust { with_centering, with_scaling } => columns()
            .map(|mut col| {
                if col.is_empty() {
                    return (0.0, 1.0);
                }
                col.sort_by(f64::total_cmp);
                let centre = if with_centering { quantile_sorted(&col, 0.5) } else { 0.0 };
                let iqr = quantile_sorted(&col, 0.75) - quantile_sorted(&col, 0.25);
                (centre, if with_scaling { nonzero(iqr) } else { 1.0 })
            })
            .unzip(),
        ScalerSpec::Standard { with_mean, with_std } => columns()
            .map(|col| {
                if col.is_empty() {
                    return (0.0, 1.0);
                }
                let n = col.len() as f64;
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let constant = col.iter().all(|&v| v == col[0]);
                let std = if constant { 0.0 } else { var.sqrt() };
                (if with_mean { mean } else { 0.0 }, if with_std { nonzero(std) } else { 1.0 })
            })
            .unzip(),
    };
    ScalerState::Affine { shift, scale }
}

pub fn apply_scaler(state: &ScalerState, x: &Matrix) -> Matrix {
    let mut out = x.clone();
    match state {
        ScalerState::Normalizer(norm) => {
            for r in 0..out.rows() {
                let row = out.row_mut(r);
                let n = match norm {
                    Norm::L1 => row.iter().map(|v| v.abs()).sum::<f64>(),
                    Norm::L2 => row.iter().map(|v| v * v).sum::<f64>().sqrt(),
                    Norm::Max => row.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                };
                let n = nonzero(n);
                row.iter_mut().for_each(|v| *v /= n);
            }
        }
        ScalerState::Affine { shift, scale } => {
            for r in 0..out.rows() {
                for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                    *v = (*v - shift[c]) / scale[c];
                }
            }
        }
    }
    out
}
