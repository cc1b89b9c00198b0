//! Counts toxicophore and fragment matches, plus a hand-built pattern.
use pk_automl::chem::library::{fragment_library, toxicophore_library, toxicophores};
use pk_automl::chem::pattern::{BondQuery, PatternAtom};
use pk_automl::chem::{match_pattern, parse_smiles, BondOrder, Element, Pattern};

fn main() {
    let m = parse_smiles("O=[N+]([O-])c1ccc(N)cc1C=O").unwrap();
    for (entry, n) in toxicophore_library().iter().zip(toxicophores(&m)) {
        if n > 0.0 {
            println!("toxicophore {:<28} x{n}", entry.name);
        }
    }
    println!("{} toxicophores, {} fragments in the libraries", toxicophore_library().len(), fragment_library().len());

    // carbonyl: C=O
    let mut carbonyl = Pattern::new();
    let c = carbonyl.atom(PatternAtom::element(Element::C));
    let o = carbonyl.atom(PatternAtom::element(Element::O));
    carbonyl.bond(c, o, BondQuery::Order(BondOrder::Double));
    println!("carbonyl matches: {}", match_pattern(&m, &carbonyl).unwrap());
}
