//! Parses SMILES and computes each descriptor group.
use pk_automl::chem::descriptors::DEFAULT_MAX_DISTANCE;
use pk_automl::chem::{featurize, parse_smiles, FeatureGroup, GroupSet};

fn main() {
    let smiles = ["CC(=O)Oc1ccccc1C(=O)O", "c1ccc(cc1)[N+](=O)[O-]", "CCN(CC)CC", "C1CCCCC1O"];
    for s in smiles {
        let m = parse_smiles(s).expect("valid SMILES");
        println!("{s}: {} atoms, {} bonds", m.atom_count(), m.bonds().len());
    }
    for g in FeatureGroup::ALL {
        let set = GroupSet::from_groups(&[g]).unwrap();
        let x = featurize(&smiles, set, DEFAULT_MAX_DISTANCE).unwrap();
        println!("{:<24} {:3} columns, first: {}", g.token(), x.data.cols(), x.names[0]);
    }
    let all = featurize(&smiles, GroupSet::all(), DEFAULT_MAX_DISTANCE).unwrap();
    println!("all groups: {} x {}", all.data.rows(), all.data.cols());

    match parse_smiles("c1ccc") {
        Ok(_) => println!("unexpected parse"),
        Err(e) => println!("rejected c1ccc: {e}"),
    }
}
