//! Synthetic labelled molecule sets assembled from scaffold and substituent
//! templates.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use super::dataset::{Dataset, Record};
use crate::chem::descriptors::general_descriptors;
use crate::chem::parse_smiles;
use crate::rng::{stream, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Label 1 iff the molecule carries a nitro group.
    NitroRule,
    /// Label 1 iff molecular weight exceeds the set's median.
    MwThreshold,
    /// Label = (halogen present) XOR (aromatic scaffold).
    NoisyXorGroups,
}

impl SynthKind {
    pub fn name(self) -> &'static str {
        match self {
            SynthKind::NitroRule => "nitro-rule",
            SynthKind::MwThreshold => "mw-threshold",
            SynthKind::NoisyXorGroups => "noisy-xor-groups",
        }
    }
}

impl FromStr for SynthKind {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, SynthError> {
        match s {
            "nitro-rule" => Ok(SynthKind::NitroRule),
            "mw-threshold" => Ok(SynthKind::MwThreshold),
            "noisy-xor-groups" => Ok(SynthKind::NoisyXorGroups),
            _ => Err(SynthError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthError {
    UnknownKind(String),
    TooFew(usize),
    BadNoise(f64),
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::UnknownKind(k) => {
                write!(f, "unknown synthetic kind '{k}' (expected nitro-rule, mw-threshold or noisy-xor-groups)")
            }
            SynthError::TooFew(n) => write!(f, "synthetic sets need at least 20 molecules, got {n}"),
            SynthError::BadNoise(r) => write!(f, "noise rate {r} outside [0, 1]"),
        }
    }
}

impl std::error::Error for SynthError {}

pub const MIN_SYNTH_SIZE: usize = 20;

// Each `{}` is a branch slot, filled with `(substituent)` or left empty.
const AROMATIC_SCAFFOLDS: [&str; 3] = ["c1c{}cc{}cc1", "c1c{}nc{}cc1", "c1c{}ccc2c1cc{}cc2"];
const ALIPHATIC_SCAFFOLDS: [&str; 4] = ["C{}C{}CC", "C1C{}CC{}CC1", "OCC{}C{}C", "C1C{}CC{}C1"];
const PLAIN: [&str; 13] =
    ["C", "CC", "O", "N", "OC", "C(=O)O", "C(=O)N", "C#N", "CO", "C(C)C", "S", "C(=O)C", "CCN"];
const HALOGENS: [&str; 3] = ["F", "Cl", "Br"];
const NITRO: &str = "[N+](=O)[O-]";
const FILL_PROBABILITY: f64 = 0.7;

fn assemble(scaffold: &str, slots: &[Option<&str>]) -> String {
    let mut out = String::new();
    let mut parts = scaffold.split("{}");
    out.push_str(parts.next().unwrap());
    for (part, sub) in parts.zip(slots) {
        if let Some(s) = sub {
            out.push('(');
            out.push_str(s);
            out.push(')');
        }
        out.push_str(part);
    }
    out
}

/// One molecule. `forced` goes into a random slot; other slots draw from
/// `pool` with probability [`FILL_PROBABILITY`].
fn molecule(rng: &mut StreamRng, aromatic: bool, pool: &[&'static str], forced: Option<&'static str>) -> String {
    let scaffold = if aromatic {
        AROMATIC_SCAFFOLDS.choose(rng).unwrap()
    } else {
        ALIPHATIC_SCAFFOLDS.choose(rng).unwrap()
    };
    let n_slots = scaffold.matches("{}").count();
    let mut slots: Vec<Option<&str>> =
        (0..n_slots).map(|_| rng.gen_bool(FILL_PROBABILITY).then(|| *pool.choose(rng).unwrap())).collect();
    if let Some(f) = forced {
        let i = rng.gen_range(0..n_slots);
        slots[i] = Some(f);
    }
    assemble(scaffold, &slots)
}

/// Builds `n` labelled molecules, then flips each label with probability
/// `noise_rate`. Deterministic for a seed.
pub fn synth_dataset(kind: SynthKind, n: usize, noise_rate: f64, seed: u64) -> Result<Dataset, SynthError> {
    if n < MIN_SYNTH_SIZE {
        return Err(SynthError::TooFew(n));
    }
    if !(0.0..=1.0).contains(&noise_rate) {
        return Err(SynthError::BadNoise(noise_rate));
    }
    let mut rng = stream(seed, "synth", kind as u64, 0);
    let with_halogens: Vec<&str> = PLAIN.iter().chain(&HALOGENS).copied().collect();
    let mut smiles = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    match kind {
        SynthKind::NitroRule => {
            for _ in 0..n {
                let positive = rng.gen_bool(0.5);
                let aromatic = rng.gen_bool(0.5);
                smiles.push(molecule(&mut rng, aromatic, &with_halogens, positive.then_some(NITRO)));
                labels.push(u8::from(positive));
            }
        }
        SynthKind::NoisyXorGroups => {
            for _ in 0..n {
                let halogen = rng.gen_bool(0.5);
                let aromatic = rng.gen_bool(0.5);
                let forced = halogen.then(|| *HALOGENS.choose(&mut rng).unwrap());
                let pool: &[&str] = if halogen { &with_halogens } else { &PLAIN };
                smiles.push(molecule(&mut rng, aromatic, pool, forced));
                labels.push(u8::from(halogen ^ aromatic));
            }
        }
        SynthKind::MwThreshold => {
            let mut pool = with_halogens.clone();
            pool.push(NITRO);
            let mut mw = Vec::with_capacity(n);
            for _ in 0..n {
                let aromatic = rng.gen_bool(0.5);
                let s = molecule(&mut rng, aromatic, &pool, None);
                mw.push(general_descriptors(&parse_smiles(&s).expect("templates parse"))[0]);
                smiles.push(s);
            }
            let mut sorted = mw.clone();
            sorted.sort_by(f64::total_cmp);
            let median = sorted[n / 2];
            labels.extend(mw.iter().map(|&w| u8::from(w >= median)));
        }
    }
    for l in labels.iter_mut() {
        if rng.gen_bool(noise_rate) {
            *l ^= 1;
        }
    }
    let records = smiles
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (smiles, label))| Record { id: format!("mol{i:05}"), smiles, label })
        .collect();
    Ok(Dataset::from_records(kind.name(), records))
}
