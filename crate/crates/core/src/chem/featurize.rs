//! Assembly of feature-group blocks into a feature matrix.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::descriptors::{
    advanced_descriptors, advanced_names, general_descriptors, general_names, graph_signatures, signature_names,
};
use super::graph::MoleculeGraph;
use super::library::{fragment_library, fragments, toxicophore_library, toxicophores};
use super::smiles::{parse_smiles, SmilesError};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureGroup {
    General,
    Advanced,
    Signatures,
    Toxicophores,
    Fragments,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::General,
        FeatureGroup::Advanced,
        FeatureGroup::Signatures,
        FeatureGroup::Toxicophores,
        FeatureGroup::Fragments,
    ];

    /// Grammar terminal naming this group.
    pub fn token(self) -> &'static str {
        match self {
            FeatureGroup::General => "General_Descriptors",
            FeatureGroup::Advanced => "Advanced_Descriptors",
            FeatureGroup::Signatures => "Graph-based_Signatures",
            FeatureGroup::Toxicophores => "Toxicophores",
            FeatureGroup::Fragments => "Fragments",
        }
    }

    pub fn from_token(t: &str) -> Option<FeatureGroup> {
        Self::ALL.into_iter().find(|g| g.token() == t)
    }

    fn prefix(self) -> &'static str {
        match self {
            FeatureGroup::General => "gen",
            FeatureGroup::Advanced => "adv",
            FeatureGroup::Signatures => "sig",
            FeatureGroup::Toxicophores => "tox",
            FeatureGroup::Fragments => "frag",
        }
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }

    pub fn names(self, max_distance: usize) -> Vec<String> {
        let raw = match self {
            FeatureGroup::General => general_names(),
            FeatureGroup::Advanced => advanced_names(),
            FeatureGroup::Signatures => signature_names(max_distance),
            FeatureGroup::Toxicophores => toxicophore_library().iter().map(|e| e.name.to_string()).collect(),
            FeatureGroup::Fragments => fragment_library().iter().map(|e| e.name.to_string()).collect(),
        };
        raw.into_iter().map(|n| format!("{}:{n}", self.prefix())).collect()
    }

    pub fn compute(self, m: &MoleculeGraph, max_distance: usize) -> Vec<f64> {
        let v = match self {
            FeatureGroup::General => general_descriptors(m),
            FeatureGroup::Advanced => advanced_descriptors(m),
            FeatureGroup::Signatures => graph_signatures(m, max_distance),
            FeatureGroup::Toxicophores => toxicophores(m),
            FeatureGroup::Fragments => fragments(m),
        };
        v.into_iter().map(|x| if x.is_finite() { x } else { 0.0 }).collect()
    }
}

/// Nonempty subset of the five feature groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupSet(u8);

impl GroupSet {
    pub fn from_groups(groups: &[FeatureGroup]) -> Option<GroupSet> {
        let bits = groups.iter().fold(0, |acc, g| acc | g.bit());
        (bits != 0).then_some(GroupSet(bits))
    }

    pub fn from_bits(bits: u8) -> Option<GroupSet> {
        (bits != 0 && bits < 32).then_some(GroupSet(bits))
    }

    pub fn all() -> GroupSet {
        GroupSet(31)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, g: FeatureGroup) -> bool {
        self.0 & g.bit() != 0
    }

    /// Members in canonical order.
    pub fn groups(self) -> Vec<FeatureGroup> {
        FeatureGroup::ALL.into_iter().filter(|g| self.contains(*g)).collect()
    }

    /// All 31 nonempty subsets.
    pub fn every() -> Vec<GroupSet> {
        (1..32).map(GroupSet).collect()
    }

    pub fn column_names(self, max_distance: usize) -> Vec<String> {
        self.groups().into_iter().flat_map(|g| g.names(max_distance)).collect()
    }
}

impl fmt::Display for GroupSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.groups().iter().map(|g| g.token()).collect();
        f.write_str(&names.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub groups: Vec<FeatureGroup>,
    pub data: Matrix,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.data.rows()
    }

    pub fn cols(&self) -> usize {
        self.data.cols()
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix { names: self.names.clone(), groups: self.groups.clone(), data: self.data.select_rows(idx) }
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.names)?;
        for r in 0..self.rows() {
            out.write_record(self.data.row(r).iter().map(|v| v.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug)]
pub enum FeaturizeError {
    Parse { row: usize, error: SmilesError },
    Cache(String),
}

impl fmt::Display for FeaturizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeaturizeError::Parse { row, error } => write!(f, "row {row}: {error}"),
            FeaturizeError::Cache(msg) => write!(f, "feature cache: {msg}"),
        }
    }
}

impl std::error::Error for FeaturizeError {}

pub fn parse_all<S: AsRef<str> + Sync>(smiles: &[S]) -> Result<Vec<MoleculeGraph>, FeaturizeError> {
    smiles
        .par_iter()
        .enumerate()
        .map(|(row, s)| parse_smiles(s.as_ref()).map_err(|error| FeaturizeError::Parse { row, error }))
        .collect()
}

/// Per-group feature blocks for a molecule set, computed once and sliced
/// into any group combination.
#[derive(Debug, Clone)]
pub struct FeatureBlocks {
    max_distance: usize,
    blocks: Vec<Option<Matrix>>,
}

impl FeatureBlocks {
    pub fn compute(molecules: &[MoleculeGraph], groups: GroupSet, max_distance: usize) -> FeatureBlocks {
        let blocks = FeatureGroup::ALL
            .iter()
            .map(|&g| {
                groups.contains(g).then(|| {
                    let width = g.names(max_distance).len();
                    let rows: Vec<Vec<f64>> = molecules.par_iter().map(|m| g.compute(m, max_distance)).collect();
                    let data = rows.into_iter().flatten().collect();
                    Matrix::from_vec(molecules.len(), width, data)
                })
            })
            .collect();
        FeatureBlocks { max_distance, blocks }
    }

    /// Panics if a requested group was not computed.
    pub fn assemble(&self, groups: GroupSet) -> FeatureMatrix {
        let mut names = Vec::new();
        let mut tags = Vec::new();
        let mut parts = Vec::new();
        for g in groups.groups() {
            let block = self.blocks[g as usize].as_ref().expect("group block computed");
            let n = g.names(self.max_distance);
            tags.extend(std::iter::repeat_n(g, n.len()));
            names.extend(n);
            parts.push(block);
        }
        FeatureMatrix { names, groups: tags, data: Matrix::hstack(&parts) }
    }
}

pub fn featurize_molecules(molecules: &[MoleculeGraph], groups: GroupSet, max_distance: usize) -> FeatureMatrix {
    FeatureBlocks::compute(molecules, groups, max_distance).assemble(groups)
}

pub fn featurize<S: AsRef<str> + Sync>(
    smiles: &[S],
    groups: GroupSet,
    max_distance: usize,
) -> Result<FeatureMatrix, FeaturizeError> {
    Ok(featurize_molecules(&parse_all(smiles)?, groups, max_distance))
}

/// Hex digest identifying a featurization request.
pub fn cache_key<S: AsRef<str>>(smiles: &[S], groups: GroupSet, max_distance: usize) -> String {
    let mut h = Sha256::new();
    for s in smiles {
        h.update(s.as_ref().as_bytes());
        h.update(b"\n");
    }
    h.update([groups.bits()]);
    h.update((max_distance as u64).to_le_bytes());
    hex::encode(h.finalize())
}

fn read_cache(path: &Path, groups: GroupSet, max_distance: usize) -> Result<FeatureMatrix, FeaturizeError> {
    let err = |e: csv::Error| FeaturizeError::Cache(e.to_string());
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let names: Vec<String> = r.headers().map_err(err)?.iter().map(String::from).collect();
    let expected = groups.column_names(max_distance);
    if names != expected {
        return Err(FeaturizeError::Cache(format!("{} has unexpected columns", path.display())));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(err)?;
        let row: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| FeaturizeError::Cache(e.to_string()))?);
    }
    let tags = groups.groups().into_iter().flat_map(|g| std::iter::repeat_n(g, g.names(max_distance).len())).collect();
    let data = if rows.is_empty() { Matrix::zeros(0, names.len()) } else { Matrix::from_rows(&rows) };
    Ok(FeatureMatrix { names, groups: tags, data })
}

/// Featurizes through an on-disk CSV cache keyed by [`cache_key`].
pub fn featurize_cached<S: AsRef<str> + Sync>(
    smiles: &[S],
    groups: GroupSet,
    max_distance: usize,
    cache_dir: &Path,
) -> Result<FeatureMatrix, FeaturizeError> {
    let path = cache_dir.join(format!("{}.csv", cache_key(smiles, groups, max_distance)));
    if path.exists() {
        if let Ok(m) = read_cache(&path, groups, max_distance) {
            if m.rows() == smiles.len() {
                return Ok(m);
            }
        }
    }
    let m = featurize(smiles, groups, max_distance)?;
    let io_err = |e: io::Error| FeaturizeError::Cache(e.to_string());
    fs::create_dir_all(cache_dir).map_err(io_err)?;
    let tmp = path.with_extension("csv.tmp");
    m.write_csv(fs::File::create(&tmp).map_err(io_err)?).map_err(|e| FeaturizeError::Cache(e.to_string()))?;
    fs::rename(&tmp, &path).map_err(io_err)?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_groups_width() {
        let m = featurize(&["CCO"], GroupSet::all(), 6).unwrap();
        assert_eq!(m.cols(), 18 + 6 + 126 + 12 + 16);
        let unique: std::collections::HashSet<_> = m.names.iter().collect();
        assert_eq!(unique.len(), m.names.len());
        assert_eq!(GroupSet::every().len(), 31);
    }

    #[test]
    fn parse_errors_carry_row() {
        match featurize(&["CC", "C1C"], GroupSet::all(), 6) {
            Err(FeaturizeError::Parse { row: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let smiles = ["CCO", "c1ccccc1O"];
        let g = GroupSet::from_groups(&[FeatureGroup::General, FeatureGroup::Fragments]).unwrap();
        let a = featurize_cached(&smiles, g, 6, dir.path()).unwrap();
        let b = featurize_cached(&smiles, g, 6, dir.path()).unwrap();
        assert_eq!(a, b);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
