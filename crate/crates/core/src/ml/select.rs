use serde::{Deserialize, Serialize};

use super::MlError;
use crate::matrix::Matrix;
use crate::special::f_sf;

/// Smallest reported p-value.
pub const P_FLOOR: f64 = 1e-300;

/// Hyper-parameters stored in hundredths so that they round-trip exactly
/// through grammar tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectorSpec {
    VarianceThreshold { threshold_centi: u32 },
    Percentile { percentile: u32 },
    Fpr { alpha_centi: u32 },
    Fdr { alpha_centi: u32 },
    Fwe { alpha_centi: u32 },
}

/// Two-group one-way ANOVA: returns `(F, p)`.
pub fn f_oneway(column: &[f64], y: &[u8]) -> Result<(f64, f64), MlError> {
    let n = column.len();
    let n1 = y.iter().filter(|&&v| v == 1).count();
    let n0 = n - n1;
    if n0 == 0 || n1 == 0 {
        return Err(MlError::SingleClass);
    }
    if n < 3 {
        return Err(MlError::EmptyInput);
    }
    let (mut s0, mut s1) = (0.0, 0.0);
    for (&v, &c) in column.iter().zip(y) {
        if c == 1 {
            s1 += v;
        } else {
            s0 += v;
        }
    }
    let (m0, m1) = (s0 / n0 as f64, s1 / n1 as f64);
    let m = (s0 + s1) / n as f64;
    let ssb = n0 as f64 * (m0 - m).powi(2) + n1 as f64 * (m1 - m).powi(2);
    let ssw: f64 = column.iter().zip(y).map(|(&v, &c)| (v - if c == 1 { m1 } else { m0 }).powi(2)).sum();
    let group_constant = |cls: u8| {
        let mut it = column.iter().zip(y).filter(|(_, &c)| c == cls).map(|(v, _)| *v);
        let first = it.next();
        it.all(|v| Some(v) == first)
    };
    let within_zero = ssw == 0.0 || (group_constant(0) && group_constant(1));
    let between_zero = ssb == 0.0 || m0 == m1;
    let f = match (within_zero, between_zero) {
        (_, true) => 0.0,
        (true, false) => f64::INFINITY,
        _ => ssb / (ssw / (n as f64 - 2.0)),
    };
    let p = f_sf(f, 1.0, n as f64 - 2.0).max(P_FLOOR);
    Ok((f, p))
}

pub fn population_variance(col: &[f64]) -> f64 {
    if col.iter().all(|&v| v == col[0]) {
        return 0.0;
    }
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Benjamini-Hochberg keep mask.
pub fn benjamini_hochberg(p: &[f64], alpha: f64) -> Vec<bool> {
    let m = p.len();
    let mut sorted: Vec<f64> = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cutoff = (1..=m).rev().find(|&i| sorted[i - 1] <= i as f64 / m as f64 * alpha).map(|i| sorted[i - 1]);
    p.iter().map(|&v| cutoff.is_some_and(|c| v <= c)).collect()
}

/// Bonferroni keep mask.
pub fn bonferroni(p: &[f64], alpha: f64) -> Vec<bool> {
    let m = p.len() as f64;
    p.iter().map(|&v| v < alpha / m).collect()
}

/// Indices of the `k` largest scores, ties going to the lower index.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

fn anova_columns(x: &Matrix, y: &[u8]) -> Result<Vec<(f64, f64)>, MlError> {
    (0..x.cols()).map(|c| f_oneway(&x.column(c), y)).collect()
}

/// Kept column indices, ascending. An empty result is legal.
pub fn fit_selector(spec: SelectorSpec, x: &Matrix, y: &[u8]) -> Result<Vec<usize>, MlError> {
    if x.rows() == 0 {
        return Err(MlError::EmptyInput);
    }
    let keep = |mask: Vec<bool>| mask.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect();
    Ok(match spec {
        SelectorSpec::VarianceThreshold { threshold_centi } => {
            let t = f64::from(threshold_centi) / 100.0;
            keep((0..x.cols()).map(|c| population_variance(&x.column(c)) > t).collect())
        }
        SelectorSpec::Percentile { percentile } => {
            let f: Vec<f64> = anova_columns(x, y)?.into_iter().map(|(f, _)| f).collect();
            let k = (x.cols() * percentile as usize).div_ceil(100);
            top_k(&f, k)
        }
        SelectorSpec::Fpr { alpha_centi } => {
            let a = f64::from(alpha_centi) / 100.0;
            keep(anova_columns(x, y)?.into_iter().map(|(_, p)| p < a).collect())
        }
        SelectorSpec::Fwe { alpha_centi } => {
            let p: Vec<f64> = anova_columns(x, y)?.into_iter().map(|(_, p)| p).collect();
            keep(bonferroni(&p, f64::from(alpha_centi) / 100.0))
        }
        SelectorSpec::Fdr { alpha_centi } => {
            let p: Vec<f64> = anova_columns(x, y)?.into_iter().map(|(_, p)| p).collect();
            keep(benjamini_hochberg(&p, f64::from(alpha_centi) / 100.0))
        }
    })
}

pub fn apply_selector(kept: &[usize], x: &Matrix) -> Matrix {
    x.select_cols(kept)
}
