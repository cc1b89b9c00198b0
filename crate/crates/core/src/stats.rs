//! Average ranks, the Iman-Davenport corrected Friedman test and Nemenyi
//! critical differences for multi-method, multi-dataset comparisons.

use std::fmt::{self, Write as _};
use std::io;

use crate::special::f_sf;

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    TooFewMethods(usize),
    TooFewDatasets(usize),
    RaggedRow { row: usize },
    NonFinite { row: usize, col: usize },
    UntabulatedK(usize),
    UnsupportedAlpha(f64),
    Csv(String),
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::TooFewMethods(k) => write!(f, "need at least 2 methods, found {k}"),
            StatsError::TooFewDatasets(n) => write!(f, "need at least 2 datasets, found {n}"),
            StatsError::RaggedRow { row } => write!(f, "row {row} has the wrong number of scores"),
            StatsError::NonFinite { row, col } => write!(f, "score at row {row}, column {col} is not a finite number"),
            StatsError::UntabulatedK(k) => write!(f, "no Nemenyi q value tabulated for k = {k}"),
            StatsError::UnsupportedAlpha(a) => write!(f, "no Nemenyi q table for alpha = {a}"),
            StatsError::Csv(msg) => write!(f, "score table: {msg}"),
        }
    }
}

impl std::error::Error for StatsError {}

/// Scores per dataset (rows) and method (columns); higher is better.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    pub scores: Vec<Vec<f64>>,
}

impl ScoreTable {
    pub fn new(methods: Vec<String>, datasets: Vec<String>, scores: Vec<Vec<f64>>) -> Result<ScoreTable, StatsError> {
        if methods.len() < 2 {
            return Err(StatsError::TooFewMethods(methods.len()));
        }
        if datasets.len() < 2 || scores.len() != datasets.len() {
            return Err(StatsError::TooFewDatasets(datasets.len().min(scores.len())));
        }
        for (r, row) in scores.iter().enumerate() {
            if row.len() != methods.len() {
                return Err(StatsError::RaggedRow { row: r });
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite { row: r, col: c });
            }
        }
        Ok(ScoreTable { methods, datasets, scores })
    }

    /// Reads `dataset,method1,...,methodk` CSV.
    pub fn from_csv<R: io::Read>(reader: R) -> Result<ScoreTable, StatsError> {
        let err = |e: csv::Error| StatsError::Csv(e.to_string());
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers().map_err(err)?.clone();
        let methods: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
        let mut datasets = Vec::new();
        let mut scores = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec.map_err(err)?;
            datasets.push(rec.get(0).unwrap_or_default().trim().to_string());
            let vals = rec
                .iter()
                .skip(1)
                .enumerate()
                .map(|(col, v)| v.trim().parse::<f64>().map_err(|_| StatsError::NonFinite { row, col }))
                .collect::<Result<Vec<_>, _>>()?;
            scores.push(vals);
        }
        ScoreTable::new(methods, datasets, scores)
    }

    pub fn k(&self) -> usize {
        self.methods.len()
    }

    pub fn n(&self) -> usize {
        self.datasets.len()
    }
}

/// Ranks of one row, 1 = highest score, ties sharing their mean rank.
pub fn row_ranks(row: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
    let mut ranks = vec![0.0; row.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && row[idx[j + 1]] == row[idx[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            ranks[t] = mean;
        }
        i = j + 1;
    }
    ranks
}

pub fn average_ranks(t: &ScoreTable) -> Vec<f64> {
    let mut sum = vec![0.0; t.k()];
    for row in &t.scores {
        for (s, r) in sum.iter_mut().zip(row_ranks(row)) {
            *s += r;
        }
    }
    sum.iter().map(|s| s / t.n() as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FriedmanResult {
    pub chi2: f64,
    pub f: f64,
    pub p: f64,
    /// Set when `N(k-1) = chi2`, where the corrected statistic is unbounded.
    pub degenerate: bool,
}

pub fn friedman_iman_davenport(ranks: &[f64], n: usize) -> FriedmanResult {
    let k = ranks.len() as f64;
    let nf = n as f64;
    let sum_sq: f64 = ranks.iter().map(|r| r * r).sum();
    let chi2 = (12.0 * nf / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0).powi(2) / 4.0)).max(0.0);
    let den = nf * (k - 1.0) - chi2;
    if den <= 0.0 {
        return FriedmanResult { chi2, f: f64::INFINITY, p: 0.0, degenerate: true };
    }
    let f = (nf - 1.0) * chi2 / den;
    let p = f_sf(f, k - 1.0, (k - 1.0) * (nf - 1.0));
    FriedmanResult { chi2, f, p, degenerate: false }
}

/// Studentized-range based Nemenyi q values (q_alpha / sqrt 2) for
/// k = 2..=10, as tabulated by Demšar (2006, JMLR 7, Table 5).
const Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
const Q_10: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64, StatsError> {
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &Q_05
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_10
    } else {
        return Err(StatsError::UnsupportedAlpha(alpha));
    };
    if !(2..=10).contains(&k) {
        return Err(StatsError::UntabulatedK(k));
    }
    Ok(table[k - 2])
}

pub fn nemenyi_cd(k: usize, n: usize, alpha: f64) -> Result<f64, StatsError> {
    if n < 2 {
        return Err(StatsError::TooFewDatasets(n));
    }
    let kf = k as f64;
    Ok(nemenyi_q(k, alpha)? * (kf * (kf + 1.0) / (6.0 * n as f64)).sqrt())
}

/// `m[i][j]` is true when methods i and j differ by at least `cd` in rank.
pub fn pairwise_significance(ranks: &[f64], cd: f64) -> Vec<Vec<bool>> {
    ranks.iter().map(|a| ranks.iter().map(|b| (a - b).abs() >= cd).collect()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub methods: Vec<String>,
    pub n: usize,
    pub ranks: Vec<f64>,
    pub friedman: FriedmanResult,
    pub alpha: f64,
    pub cd: f64,
    pub significant: Vec<Vec<bool>>,
}

pub fn compare(t: &ScoreTable, alpha: f64) -> Result<ComparisonReport, StatsError> {
    let ranks = average_ranks(t);
    let friedman = friedman_iman_davenport(&ranks, t.n());
    let cd = nemenyi_cd(t.k(), t.n(), alpha)?;
    let significant = pairwise_significance(&ranks, cd);
    Ok(ComparisonReport { methods: t.methods.clone(), n: t.n(), ranks, friedman, alpha, cd, significant })
}

impl ComparisonReport {
    /// Ranks followed by the pairwise significance matrix.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("method,average_rank");
        for m in &self.methods {
            write!(s, ",{m}").unwrap();
        }
        s.push('\n');
        for (i, m) in self.methods.iter().enumerate() {
            write!(s, "{m},{:.6}", self.ranks[i]).unwrap();
            for sig in &self.significant[i] {
                s.push_str(if *sig { ",1" } else { ",0" });
            }
            s.push('\n');
        }
        s
    }

    /// Friedman/Iman-Davenport statistics and the CD as one CSV row.
    pub fn summary_csv(&self) -> String {
        format!(
            "n,k,chi2_f,f_f,p_value,alpha,cd\n{},{},{:.6},{:.6},{:.6e},{},{:.6}\n",
            self.n,
            self.methods.len(),
            self.friedman.chi2,
            self.friedman.f,
            self.friedman.p,
            self.alpha,
            self.cd
        )
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("# Method comparison\n\n| Method | Average rank |\n|---|---|\n");
        for (m, r) in self.methods.iter().zip(&self.ranks) {
            writeln!(s, "| {m} | {r:.3} |").unwrap();
        }
        writeln!(s, "\nDatasets: {}, methods: {}\n", self.n, self.methods.len()).unwrap();
        writeln!(s, "- Friedman chi2_F = {:.4}", self.friedman.chi2).unwrap();
        if self.friedman.degenerate {
            writeln!(s, "- Iman-Davenport F_F is unbounded (degenerate); p reported as 0").unwrap();
        } else {
            writeln!(s, "- Iman-Davenport F_F = {:.4}", self.friedman.f).unwrap();
        }
        writeln!(s, "- p-value = {:.6}", self.friedman.p).unwrap();
        writeln!(s, "- Nemenyi CD (alpha = {}) = {:.4}\n", self.alpha, self.cd).unwrap();
        s.push_str("| |");
        for m in &self.methods {
            write!(s, " {m} |").unwrap();
        }
        s.push_str("\n|---|");
        s.push_str(&"---|".repeat(self.methods.len()));
        s.push('\n');
        for (i, m) in self.methods.iter().enumerate() {
            write!(s, "| {m} |").unwrap();
            for (j, sig) in self.significant[i].iter().enumerate() {
                s.push_str(if i == j { " - |" } else if *sig { " yes |" } else { " no |" });
            }
            s.push('\n');
        }
        s
    }
}
