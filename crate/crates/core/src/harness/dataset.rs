use std::collections::HashSet;
use std::fmt;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::chem::{parse_smiles, MoleculeGraph, SmilesError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub id: String,
    pub smiles: String,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quarantined {
    pub row: usize,
    pub id: String,
    pub smiles: String,
    pub error: SmilesError,
}

/// Parsed molecules with binary labels. Rows whose SMILES fail to parse are
/// kept aside in `quarantine` and never featurized.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub records: Vec<Record>,
    pub molecules: Vec<MoleculeGraph>,
    pub quarantine: Vec<Quarantined>,
}

#[derive(Debug)]
pub enum IngestError {
    Io(io::Error),
    Csv(csv::Error),
    MissingColumn(&'static str),
    NonBinaryLabel { row: usize, value: String },
    DuplicateId { row: usize, id: String },
    Empty,
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestError::Io(e) => write!(f, "{e}"),
            IngestError::Csv(e) => write!(f, "{e}"),
            IngestError::MissingColumn(c) => write!(f, "missing column '{c}'"),
            IngestError::NonBinaryLabel { row, value } => write!(f, "row {row}: non-binary label '{value}'"),
            IngestError::DuplicateId { row, id } => write!(f, "row {row}: duplicate id '{id}'"),
            IngestError::Empty => f.write_str("dataset has no rows"),
        }
    }
}

impl std::error::Error for IngestError {}

impl From<csv::Error> for IngestError {
    fn from(e: csv::Error) -> Self {
        IngestError::Csv(e)
    }
}

impl Dataset {
    /// Parses records, moving unparseable ones to the quarantine list.
    pub fn from_records(name: &str, rows: Vec<Record>) -> Dataset {
        let mut records = Vec::new();
        let mut molecules = Vec::new();
        let mut quarantine = Vec::new();
        for (row, r) in rows.into_iter().enumerate() {
            match parse_smiles(&r.smiles) {
                Ok(m) => {
                    records.push(r);
                    molecules.push(m);
                }
                Err(error) => quarantine.push(Quarantined { row, id: r.id, smiles: r.smiles, error }),
            }
        }
        Dataset { name: name.to_string(), records, molecules, quarantine }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn smiles(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.smiles.as_str()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "smiles", "label"]).unwrap();
        for r in &self.records {
            w.write_record([r.id.as_str(), r.smiles.as_str(), if r.label == 1 { "1" } else { "0" }]).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn quarantine_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["row", "id", "smiles", "reason"]).unwrap();
        for q in &self.quarantine {
            w.write_record([q.row.to_string(), q.id.clone(), q.smiles.clone(), q.error.to_string()]).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads a CSV with `smiles` and `label` columns and an optional `id`
/// column. Missing ids become the zero-based row number.
pub fn ingest_reader<R: io::Read>(name: &str, reader: R) -> Result<Dataset, IngestError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = r.headers()?.clone();
    let col = |name: &'static str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
    let smiles_col = col("smiles").ok_or(IngestError::MissingColumn("smiles"))?;
    let label_col = col("label").ok_or(IngestError::MissingColumn("label"))?;
    let id_col = col("id");
    let mut rows = Vec::new();
    let mut ids = HashSet::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let value = rec.get(label_col).unwrap_or_default();
        let label = match value {
            "0" => 0,
            "1" => 1,
            _ => return Err(IngestError::NonBinaryLabel { row, value: value.to_string() }),
        };
        let id = id_col.and_then(|c| rec.get(c)).map_or_else(|| row.to_string(), str::to_string);
        if !ids.insert(id.clone()) {
            return Err(IngestError::DuplicateId { row, id });
        }
        rows.push(Record { id, smiles: rec.get(smiles_col).unwrap_or_default().to_string(), label });
    }
    if rows.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(Dataset::from_records(name, rows))
}

pub fn ingest_csv(path: &Path) -> Result<Dataset, IngestError> {
    let name = path.file_stem().map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    let file = std::fs::File::open(path).map_err(IngestError::Io)?;
    ingest_reader(&name, file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_rows() {
        let d = ingest_reader("t", "id,smiles,label\na,CCO,1\nb,CC,0\nc,c1ccccc1,1\n".as_bytes()).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.quarantine.is_empty());
        assert_eq!(d.labels(), [1, 0, 1]);
    }

    #[test]
    fn unclosed_ring_is_quarantined() {
        let d = ingest_reader("t", "smiles,label\nCCO,1\nC1CC,0\n".as_bytes()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.quarantine[0].row, 1);
        assert!(matches!(d.quarantine[0].error, SmilesError::UnmatchedRingClosure { .. }));
        assert_eq!(d.records[0].id, "0");
    }

    #[test]
    fn errors() {
        let e = ingest_reader("t", "smiles,label\nCCO,2\n".as_bytes()).unwrap_err();
        assert!(matches!(e, IngestError::NonBinaryLabel { row: 0, ref value } if value == "2"));
        assert!(matches!(ingest_reader("t", "smiles\nCCO\n".as_bytes()), Err(IngestError::MissingColumn("label"))));
        assert!(matches!(ingest_reader("t", "smiles,label\n".as_bytes()), Err(IngestError::Empty)));
        let dup = "id,smiles,label\na,C,0\na,CC,1\n";
        assert!(matches!(ingest_reader("t", dup.as_bytes()), Err(IngestError::DuplicateId { row: 1, .. })));
    }

    #[test]
    fn csv_round_trip() {
        let d = ingest_reader("t", "id,smiles,label\na,CCO,1\nb,CC,0\n".as_bytes()).unwrap();
        let back = ingest_reader("t", d.to_csv().as_bytes()).unwrap();
        assert_eq!(back.records, d.records);
    }
}
