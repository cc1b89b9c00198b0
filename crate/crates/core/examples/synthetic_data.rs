//! Generates each synthetic benchmark set and prints label balance and digest.
use pk_automl::harness::dataset::sha256_hex;
use pk_automl::harness::{synth_dataset, SynthKind};

fn main() {
    for kind in [SynthKind::NitroRule, SynthKind::MwThreshold, SynthKind::NoisyXorGroups] {
        let d = synth_dataset(kind, 300, 0.1, 7).unwrap();
        let ones = d.labels().iter().filter(|&&l| l == 1).count();
        let csv = d.to_csv();
        println!("{:<18} {} rows, {} positive, sha256 {}", kind.name(), d.records.len(), ones, &sha256_hex(csv.as_bytes())[..16]);
        println!("  e.g. {} -> {}", d.records[0].smiles, d.records[0].label);
    }
}
