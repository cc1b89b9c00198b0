//! Built-in toxicophore and functional-group pattern libraries.

use std::collections::HashSet;
use std::sync::OnceLock;

use super::graph::{BondOrder, Element, MoleculeGraph};
use super::pattern::{embeddings, BondQuery, HydrogenQuery, Pattern, PatternAtom};

pub struct LibraryEntry {
    pub name: &'static str,
    pub pattern: Pattern,
    /// Entries whose embeddings suppress overlapping embeddings of this one.
    pub suppressed_by: Vec<usize>,
}

const SINGLE: BondQuery = BondQuery::Order(BondOrder::Single);
const DOUBLE: BondQuery = BondQuery::Order(BondOrder::Double);
const TRIPLE: BondQuery = BondQuery::Order(BondOrder::Triple);
const HALOGENS: [Element; 4] = [Element::F, Element::CL, Element::BR, Element::I];
const HEAVY_HALOGENS: [Element; 3] = [Element::CL, Element::BR, Element::I];

fn c() -> PatternAtom {
    PatternAtom::element(Element::C)
}

fn nitro(aromatic_anchor: bool) -> Pattern {
    let mut p = Pattern::new();
    let n = p.atom(PatternAtom::element(Element::N).charge(1));
    let o1 = p.atom(PatternAtom::element(Element::O).charge(0));
    let o2 = p.atom(PatternAtom::element(Element::O).charge(-1));
    p.bond(n, o1, DOUBLE).bond(n, o2, SINGLE);
    if aromatic_anchor {
        let a = p.atom(PatternAtom::default().aromatic());
        p.bond(a, n, SINGLE);
    }
    p
}

/// `X(=O)` carbonyl with an extra single-bonded neighbor; returns the pattern
/// and the carbonyl carbon index.
fn carbonyl() -> (Pattern, usize) {
    let mut p = Pattern::new();
    let cc = p.atom(c().aliphatic());
    let o = p.atom(PatternAtom::element(Element::O));
    p.bond(cc, o, DOUBLE);
    (p, cc)
}

fn pair(a: PatternAtom, b: PatternAtom, q: BondQuery) -> Pattern {
    let mut p = Pattern::new();
    let x = p.atom(a);
    let y = p.atom(b);
    p.bond(x, y, q);
    p
}

fn enone() -> Pattern {
    let mut p = Pattern::new();
    let c1 = p.atom(c().aliphatic());
    let c2 = p.atom(c().aliphatic());
    let c3 = p.atom(c().aliphatic());
    let o = p.atom(PatternAtom::element(Element::O));
    p.bond(c1, c2, DOUBLE).bond(c2, c3, SINGLE).bond(c3, o, DOUBLE);
    p
}

fn build_toxicophores() -> Vec<LibraryEntry> {
    let aromatic_amine = pair(
        PatternAtom::element(Element::C).aromatic(),
        PatternAtom::element(Element::N).aliphatic().charge(0),
        SINGLE,
    );
    let aldehyde = pair(
        c().aliphatic().hydrogens(HydrogenQuery::AtLeast(1)),
        PatternAtom::element(Element::O),
        DOUBLE,
    );
    let epoxide = {
        let mut p = Pattern::new();
        let a = p.atom(c().aliphatic());
        let b = p.atom(c().aliphatic());
        let o = p.atom(PatternAtom::element(Element::O).aliphatic());
        p.bond(a, b, SINGLE).bond(b, o, SINGLE).bond(o, a, SINGLE);
        p
    };
    let quinone = {
        // O=C-C=C-C=O enedione motif
        let mut p = enone();
        let c4 = p.atom(c().aliphatic());
        let o2 = p.atom(PatternAtom::element(Element::O));
        p.bond(0, c4, SINGLE).bond(c4, o2, DOUBLE);
        p
    };
    let acyl_halide = {
        let (mut p, cc) = carbonyl();
        let x = p.atom(PatternAtom::any_of(&HALOGENS));
        p.bond(cc, x, SINGLE);
        p
    };
    let azo = pair(
        PatternAtom::element(Element::N).aliphatic(),
        PatternAtom::element(Element::N).aliphatic(),
        DOUBLE,
    );
    let hydrazine = pair(
        PatternAtom::element(Element::N).aliphatic().charge(0),
        PatternAtom::element(Element::N).aliphatic().charge(0),
        SINGLE,
    );
    let thiol = pair(
        PatternAtom::element(Element::S).hydrogens(HydrogenQuery::AtLeast(1)),
        c(),
        SINGLE,
    );
    let alkyl_halide = pair(c().aliphatic(), PatternAtom::any_of(&HEAVY_HALOGENS), SINGLE);
    vec![
        LibraryEntry { name: "nitro", pattern: nitro(false), suppressed_by: vec![1] },
        LibraryEntry { name: "aromatic_nitro", pattern: nitro(true), suppressed_by: vec![] },
        LibraryEntry { name: "aromatic_amine", pattern: aromatic_amine, suppressed_by: vec![] },
        LibraryEntry { name: "aldehyde", pattern: aldehyde, suppressed_by: vec![] },
        LibraryEntry { name: "epoxide", pattern: epoxide, suppressed_by: vec![] },
        LibraryEntry { name: "quinone", pattern: quinone, suppressed_by: vec![] },
        LibraryEntry { name: "acyl_halide", pattern: acyl_halide, suppressed_by: vec![] },
        LibraryEntry { name: "azo", pattern: azo, suppressed_by: vec![] },
        LibraryEntry { name: "hydrazine", pattern: hydrazine, suppressed_by: vec![] },
        LibraryEntry { name: "thiol", pattern: thiol, suppressed_by: vec![] },
        LibraryEntry { name: "michael_acceptor", pattern: enone(), suppressed_by: vec![5] },
        LibraryEntry { name: "alkyl_halide", pattern: alkyl_halide, suppressed_by: vec![6] },
    ]
}

fn amine(h: u32, degree: usize) -> Pattern {
    let mut p = Pattern::new();
    let n = p.atom(
        PatternAtom::element(Element::N)
            .aliphatic()
            .charge(0)
            .hydrogens(HydrogenQuery::Exactly(h))
            .heavy_degree(degree),
    );
    for _ in 0..degree {
        let x = p.atom(c());
        p.bond(n, x, SINGLE);
    }
    p
}

fn build_fragments() -> Vec<LibraryEntry> {
    let oh = || PatternAtom::element(Element::O).aliphatic().charge(0).hydrogens(HydrogenQuery::AtLeast(1));
    let hydroxyl = pair(oh(), c(), SINGLE);
    let acid = {
        let (mut p, cc) = carbonyl();
        let o = p.atom(oh());
        p.bond(cc, o, SINGLE);
        p
    };
    let bridging_o = || PatternAtom::element(Element::O).aliphatic().charge(0).hydrogens(HydrogenQuery::Exactly(0));
    let ester = {
        let (mut p, cc) = carbonyl();
        let o = p.atom(bridging_o());
        let r = p.atom(c());
        p.bond(cc, o, SINGLE).bond(o, r, SINGLE);
        p
    };
    let ether = {
        let mut p = Pattern::new();
        let a = p.atom(c());
        let o = p.atom(bridging_o());
        let b = p.atom(c());
        p.bond(a, o, SINGLE).bond(o, b, SINGLE);
        p
    };
    let amide = {
        let (mut p, cc) = carbonyl();
        let n = p.atom(PatternAtom::element(Element::N).aliphatic());
        p.bond(cc, n, SINGLE);
        p
    };
    let ketone = {
        let (mut p, cc) = carbonyl();
        let a = p.atom(c());
        let b = p.atom(c());
        p.bond(cc, a, SINGLE).bond(cc, b, SINGLE);
        p
    };
    let aldehyde = pair(
        c().aliphatic().hydrogens(HydrogenQuery::AtLeast(1)),
        PatternAtom::element(Element::O),
        DOUBLE,
    );
    let nitrile = pair(c(), PatternAtom::element(Element::N), TRIPLE);
    let sulfonamide = {
        let mut p = Pattern::new();
        let s = p.atom(PatternAtom::element(Element::S));
        let o1 = p.atom(PatternAtom::element(Element::O));
        let o2 = p.atom(PatternAtom::element(Element::O));
        let n = p.atom(PatternAtom::element(Element::N));
        p.bond(s, o1, DOUBLE).bond(s, o2, DOUBLE).bond(s, n, SINGLE);
        p
    };
    let halogen = |e: Element| {
        let mut p = Pattern::new();
        p.atom(PatternAtom::element(e));
        p
    };
    let amine_suppressors = vec![4, 11];
    vec![
        LibraryEntry { name: "hydroxyl", pattern: hydroxyl, suppressed_by: vec![1] },
        LibraryEntry { name: "carboxylic_acid", pattern: acid, suppressed_by: vec![] },
        LibraryEntry { name: "ester", pattern: ester, suppressed_by: vec![] },
        LibraryEntry { name: "ether", pattern: ether, suppressed_by: vec![2] },
        LibraryEntry { name: "amide", pattern: amide, suppressed_by: vec![] },
        LibraryEntry { name: "primary_amine", pattern: amine(2, 1), suppressed_by: amine_suppressors.clone() },
        LibraryEntry { name: "secondary_amine", pattern: amine(1, 2), suppressed_by: amine_suppressors.clone() },
        LibraryEntry { name: "tertiary_amine", pattern: amine(0, 3), suppressed_by: amine_suppressors },
        LibraryEntry { name: "ketone", pattern: ketone, suppressed_by: vec![] },
        LibraryEntry { name: "aldehyde", pattern: aldehyde, suppressed_by: vec![] },
        LibraryEntry { name: "nitrile", pattern: nitrile, suppressed_by: vec![] },
        LibraryEntry { name: "sulfonamide", pattern: sulfonamide, suppressed_by: vec![] },
        LibraryEntry { name: "fluorine", pattern: halogen(Element::F), suppressed_by: vec![] },
        LibraryEntry { name: "chlorine", pattern: halogen(Element::CL), suppressed_by: vec![] },
        LibraryEntry { name: "bromine", pattern: halogen(Element::BR), suppressed_by: vec![] },
        LibraryEntry { name: "iodine", pattern: halogen(Element::I), suppressed_by: vec![] },
    ]
}

pub fn toxicophore_library() -> &'static [LibraryEntry] {
    static L: OnceLock<Vec<LibraryEntry>> = OnceLock::new();
    L.get_or_init(build_toxicophores)
}

pub fn fragment_library() -> &'static [LibraryEntry] {
    static L: OnceLock<Vec<LibraryEntry>> = OnceLock::new();
    L.get_or_init(build_fragments)
}

/// Embedding counts per entry after applying suppression.
pub fn count_library(m: &MoleculeGraph, lib: &[LibraryEntry]) -> Vec<f64> {
    let all: Vec<_> = lib
        .iter()
        .map(|e| embeddings(m, &e.pattern).expect("library patterns are within the size limit"))
        .collect();
    lib.iter()
        .enumerate()
        .map(|(k, e)| {
            let claimed: HashSet<usize> = e
                .suppressed_by
                .iter()
                .flat_map(|&s| all[s].iter().flat_map(|emb| emb.atoms.iter().copied()))
                .collect();
            all[k].iter().filter(|emb| !emb.atoms.iter().any(|a| claimed.contains(a))).count() as f64
        })
        .collect()
}

pub fn toxicophores(m: &MoleculeGraph) -> Vec<f64> {
    count_library(m, toxicophore_library())
}

pub fn fragments(m: &MoleculeGraph) -> Vec<f64> {
    count_library(m, fragment_library())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::smiles::parse_smiles;

    fn named(lib: &[LibraryEntry], v: &[f64]) -> Vec<(&'static str, f64)> {
        lib.iter().zip(v).filter(|(_, &x)| x != 0.0).map(|(e, &x)| (e.name, x)).collect()
    }

    fn frag(s: &str) -> Vec<(&'static str, f64)> {
        named(fragment_library(), &fragments(&parse_smiles(s).unwrap()))
    }

    fn tox(s: &str) -> Vec<(&'static str, f64)> {
        named(toxicophore_library(), &toxicophores(&parse_smiles(s).unwrap()))
    }

    #[test]
    fn library_sizes() {
        assert_eq!(toxicophore_library().len(), 12);
        assert_eq!(fragment_library().len(), 16);
    }

    #[test]
    fn fragment_examples() {
        assert_eq!(frag("CC(=O)O"), [("carboxylic_acid", 1.0)]);
        assert_eq!(frag("CCO"), [("hydroxyl", 1.0)]);
        assert!(frag("C").is_empty());
        assert_eq!(frag("CCOCC"), [("ether", 1.0)]);
        assert_eq!(frag("CC(=O)OC"), [("ester", 1.0)]);
        assert_eq!(frag("CC(=O)NC"), [("amide", 1.0)]);
        assert_eq!(frag("CCN"), [("primary_amine", 1.0)]);
        assert_eq!(frag("CNC"), [("secondary_amine", 1.0)]);
        assert_eq!(frag("CN(C)C"), [("tertiary_amine", 1.0)]);
        assert_eq!(frag("CC(=O)C"), [("ketone", 1.0)]);
        assert_eq!(frag("CC=O"), [("aldehyde", 1.0)]);
        assert_eq!(frag("CC#N"), [("nitrile", 1.0)]);
        assert_eq!(frag("CS(=O)(=O)N"), [("sulfonamide", 1.0)]);
        assert_eq!(frag("FC(Cl)Br"), [("fluorine", 1.0), ("chlorine", 1.0), ("bromine", 1.0)]);
    }

    #[test]
    fn toxicophore_examples() {
        assert!(tox("C").is_empty());
        assert_eq!(tox("c1ccccc1[N+](=O)[O-]"), [("aromatic_nitro", 1.0)]);
        assert_eq!(tox("C[N+](=O)[O-]"), [("nitro", 1.0)]);
        assert_eq!(tox("Nc1ccccc1"), [("aromatic_amine", 1.0)]);
        assert_eq!(tox("C1OC1"), [("epoxide", 1.0)]);
        assert_eq!(tox("C=CC=O"), [("aldehyde", 1.0), ("michael_acceptor", 1.0)]);
        assert_eq!(tox("O=C1C=CC(=O)C=C1"), [("quinone", 2.0)]);
        assert_eq!(tox("CC(=O)Cl"), [("acyl_halide", 1.0)]);
        assert_eq!(tox("CCCl"), [("alkyl_halide", 1.0)]);
        assert_eq!(tox("CN=NC"), [("azo", 1.0)]);
        assert_eq!(tox("NN"), [("hydrazine", 1.0)]);
        assert_eq!(tox("CS"), [("thiol", 1.0)]);
    }
}
