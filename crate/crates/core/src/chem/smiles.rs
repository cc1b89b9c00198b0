use std::collections::BTreeMap;
use std::fmt;

use super::graph::{Atom, Bond, BondOrder, Element, MoleculeGraph};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmilesError {
    UnmatchedRingClosure { offset: usize },
    UnmatchedParenthesis { offset: usize },
    UnknownAtomSymbol { offset: usize, symbol: String },
    ValenceExceeded { offset: usize },
    AromaticOutsideRing { offset: usize },
    Syntax { offset: usize, reason: &'static str },
}

impl SmilesError {
    pub fn offset(&self) -> usize {
        match self {
            SmilesError::UnmatchedRingClosure { offset }
            | SmilesError::UnmatchedParenthesis { offset }
            | SmilesError::UnknownAtomSymbol { offset, .. }
            | SmilesError::ValenceExceeded { offset }
            | SmilesError::AromaticOutsideRing { offset }
            | SmilesError::Syntax { offset, .. } => *offset,
        }
    }
}

impl fmt::Display for SmilesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmilesError::UnmatchedRingClosure { offset } => write!(f, "unmatched ring closure at offset {offset}"),
            SmilesError::UnmatchedParenthesis { offset } => write!(f, "unmatched parenthesis at offset {offset}"),
            SmilesError::UnknownAtomSymbol { offset, symbol } => {
                write!(f, "unknown atom symbol '{symbol}' at offset {offset}")
            }
            SmilesError::ValenceExceeded { offset } => write!(f, "valence exceeded for atom at offset {offset}"),
            SmilesError::AromaticOutsideRing { offset } => {
                write!(f, "aromatic atom outside a ring at offset {offset}")
            }
            SmilesError::Syntax { offset, reason } => write!(f, "{reason} at offset {offset}"),
        }
    }
}

impl std::error::Error for SmilesError {}

struct RawAtom {
    atom: Atom,
    bracket: bool,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    atoms: Vec<RawAtom>,
    bonds: Vec<Bond>,
}

const AROMATIC_ORGANIC: &[(&str, Element)] = &[
    ("b", Element::B),
    ("c", Element::C),
    ("n", Element::N),
    ("o", Element::O),
    ("p", Element::P),
    ("s", Element::S),
];

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn add_bond(&mut self, a: usize, b: usize, order: Option<BondOrder>, offset: usize) -> Result<(), SmilesError> {
        if a == b {
            return Err(SmilesError::Syntax { offset, reason: "atom bonded to itself" });
        }
        if self.bonds.iter().any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a)) {
            return Err(SmilesError::Syntax { offset, reason: "duplicate bond" });
        }
        let order = order.unwrap_or(if self.atoms[a].atom.aromatic && self.atoms[b].atom.aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        });
        self.bonds.push(Bond { a, b, order });
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<Atom, SmilesError> {
        let start = self.pos;
        let c = self.s[self.pos];
        let two = self.s.get(self.pos..self.pos + 2);
        let (element, aromatic, len) = match (c, two) {
            (b'C', Some(b"Cl")) => (Element::CL, false, 2),
            (b'B', Some(b"Br")) => (Element::BR, false, 2),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            _ => {
                return Err(SmilesError::UnknownAtomSymbol {
                    offset: start,
                    symbol: (c as char).to_string(),
                })
            }
        };
        self.pos += len;
        Ok(Atom { element, charge: 0, aromatic, hydrogens: 0, offset: start })
    }

    fn digits(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| {
            std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().unwrap_or(u32::MAX)
        })
    }

    fn bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        let open = self.pos;
        self.pos += 1;
        self.digits(); // isotope, discarded
        let sym_start = self.pos;
        let (element, aromatic) = {
            let rest = &self.s[self.pos..];
            let two = rest.get(..2).and_then(|b| std::str::from_utf8(b).ok());
            let one = rest.get(..1).and_then(|b| std::str::from_utf8(b).ok());
            let aromatic2 = [("se", Element::from_symbol("Se")), ("as", Element::from_symbol("As"))];
            if let Some(e) = two.and_then(|t| aromatic2.iter().find(|(s, _)| *s == t).and_then(|(_, e)| *e)) {
                self.pos += 2;
                (e, true)
            } else if let Some(e) = two
                .filter(|t| t.as_bytes()[0].is_ascii_uppercase() && t.as_bytes()[1].is_ascii_lowercase())
                .and_then(Element::from_symbol)
            {
                self.pos += 2;
                (e, false)
            } else if let Some(e) = one.and_then(|t| AROMATIC_ORGANIC.iter().find(|(s, _)| *s == t)) {
                self.pos += 1;
                (e.1, true)
            } else if let Some(e) = one.filter(|t| t.as_bytes()[0].is_ascii_uppercase()).and_then(Element::from_symbol) {
                self.pos += 1;
                (e, false)
            } else {
                let end = self.s[sym_start..]
                    .iter()
                    .position(|c| !c.is_ascii_alphabetic())
                    .map_or(self.s.len(), |p| sym_start + p);
                let symbol = String::from_utf8_lossy(&self.s[sym_start..end.max(sym_start + 1).min(self.s.len())]).into_owned();
                return Err(SmilesError::UnknownAtomSymbol { offset: sym_start, symbol });
            }
        };
        // chirality, discarded
        while self.peek() == Some(b'@') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_uppercase() && c != b'H') {
            self.pos += 1;
            self.digits();
        }
        let mut hydrogens = 0u32;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = self.digits().unwrap_or(1);
        }
        let mut charge = 0i32;
        while let Some(sign @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let unit = if sign == b'+' { 1 } else { -1 };
            match self.digits() {
                Some(n) => charge += unit * n.min(16) as i32,
                None => charge += unit,
            }
        }
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.digits(); // atom class, discarded
        }
        if self.peek() != Some(b']') {
            return Err(SmilesError::Syntax { offset: open, reason: "unterminated bracket atom" });
        }
        self.pos += 1;
        Ok(Atom { element, charge, aromatic, hydrogens: hydrogens.min(255) as u8, offset: open })
    }

    fn parse(&mut self) -> Result<(), SmilesError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondOrder, usize)> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        let mut rings: BTreeMap<u32, (usize, Option<BondOrder>, usize)> = BTreeMap::new();
        while let Some(c) = self.peek() {
            let offset = self.pos;
            match c {
                b'(' => {
                    let p = prev.ok_or(SmilesError::Syntax { offset, reason: "branch without a preceding atom" })?;
                    if pending.is_some() {
                        return Err(SmilesError::Syntax { offset, reason: "bond before branch" });
                    }
                    branches.push((p, offset));
                    self.pos += 1;
                }
                b')' => {
                    let (p, _) = branches.pop().ok_or(SmilesError::UnmatchedParenthesis { offset })?;
                    if pending.is_some() {
                        return Err(SmilesError::Syntax { offset, reason: "dangling bond" });
                    }
                    prev = Some(p);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if pending.is_some() {
                        return Err(SmilesError::Syntax { offset, reason: "consecutive bond symbols" });
                    }
                    let order = match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    };
                    pending = Some((order, offset));
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() {
                        return Err(SmilesError::Syntax { offset, reason: "dangling bond" });
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'%' | b'0'..=b'9' => {
                    let p = prev.ok_or(SmilesError::Syntax { offset, reason: "ring closure without an atom" })?;
                    let num = if c == b'%' {
                        let d = self.s.get(self.pos + 1..self.pos + 3).filter(|d| d.iter().all(u8::is_ascii_digit));
                        let d = d.ok_or(SmilesError::Syntax { offset, reason: "malformed %nn ring closure" })?;
                        self.pos += 3;
                        u32::from(d[0] - b'0') * 10 + u32::from(d[1] - b'0')
                    } else {
                        self.pos += 1;
                        u32::from(c - b'0')
                    };
                    let order = pending.take().map(|(o, _)| o);
                    if let Some((other, open_order, _)) = rings.remove(&num) {
                        let order = match (open_order, order) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(SmilesError::Syntax { offset, reason: "conflicting ring bond orders" })
                            }
                            (a, b) => a.or(b),
                        };
                        self.add_bond(other, p, order, offset)?;
                    } else {
                        rings.insert(num, (p, order, offset));
                    }
                }
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.push_atom(atom, true, &mut prev, &mut pending, offset)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.push_atom(atom, false, &mut prev, &mut pending, offset)?;
                }
            }
        }
        if let Some((_, offset)) = pending {
            return Err(SmilesError::Syntax { offset, reason: "dangling bond" });
        }
        if let Some((_, &(_, _, offset))) = rings.iter().next() {
            return Err(SmilesError::UnmatchedRingClosure { offset });
        }
        if let Some(&(_, offset)) = branches.first() {
            return Err(SmilesError::UnmatchedParenthesis { offset });
        }
        if self.atoms.is_empty() {
            return Err(SmilesError::Syntax { offset: 0, reason: "empty SMILES" });
        }
        Ok(())
    }

    fn push_atom(
        &mut self,
        atom: Atom,
        bracket: bool,
        prev: &mut Option<usize>,
        pending: &mut Option<(BondOrder, usize)>,
        offset: usize,
    ) -> Result<(), SmilesError> {
        let idx = self.atoms.len();
        self.atoms.push(RawAtom { atom, bracket });
        if let Some(p) = *prev {
            self.add_bond(p, idx, pending.take().map(|(o, _)| o), offset)?;
        } else if let Some((_, off)) = pending.take() {
            return Err(SmilesError::Syntax { offset: off, reason: "bond without a preceding atom" });
        }
        *prev = Some(idx);
        Ok(())
    }
}

/// Valence shift implied by a formal charge: cations of N, O, P, S gain
/// a bond, anions lose one (boron anions gain one).
fn charge_adjustment(element: Element, charge: i32) -> i32 {
    match (element, charge.signum()) {
        (e, 1) if matches!(e, Element::N | Element::O | Element::P | Element::S) => charge,
        (Element::B, -1) => -charge,
        (_, -1) => charge,
        (_, 1) => -charge,
        _ => 0,
    }
}

fn assign_hydrogens(raw: &mut [RawAtom], bonds: &[Bond]) -> Result<(), SmilesError> {
    let mut bond_sum = vec![0i32; raw.len()];
    for b in bonds {
        bond_sum[b.a] += i32::from(b.order.valence());
        bond_sum[b.b] += i32::from(b.order.valence());
    }
    for (i, r) in raw.iter_mut().enumerate() {
        let valences = r.atom.element.default_valences();
        if valences.is_empty() {
            continue;
        }
        let adj = charge_adjustment(r.atom.element, r.atom.charge);
        if r.bracket {
            let used = bond_sum[i] + i32::from(r.atom.hydrogens);
            let max = i32::from(*valences.last().unwrap()) + adj;
            if used > max.max(0) {
                return Err(SmilesError::ValenceExceeded { offset: r.atom.offset });
            }
            continue;
        }
        // aromatic B, C, N, P carry one extra pi bond in the valence sum
        let pi = i32::from(
            r.atom.aromatic && matches!(r.atom.element, Element::B | Element::C | Element::N | Element::P),
        );
        let effective = bond_sum[i] + pi;
        match valences.iter().map(|&v| i32::from(v) + adj).find(|&v| v >= effective) {
            Some(v) => r.atom.hydrogens = (v - effective) as u8,
            None if bond_sum[i] <= i32::from(*valences.last().unwrap()) + adj => r.atom.hydrogens = 0,
            None => return Err(SmilesError::ValenceExceeded { offset: r.atom.offset }),
        }
    }
    Ok(())
}

/// Parses a SMILES string into a molecule graph.
pub fn parse_smiles(text: &str) -> Result<MoleculeGraph, SmilesError> {
    let mut p = Parser { s: text.trim().as_bytes(), pos: 0, atoms: Vec::new(), bonds: Vec::new() };
    p.parse()?;
    assign_hydrogens(&mut p.atoms, &p.bonds)?;
    let g = MoleculeGraph::new(p.atoms.into_iter().map(|r| r.atom).collect(), p.bonds);
    if let Some(a) = (0..g.atom_count()).find(|&i| g.atoms()[i].aromatic && !g.is_ring_atom(i)) {
        return Err(SmilesError::AromaticOutsideRing { offset: g.atoms()[a].offset });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(g: &MoleculeGraph) -> Vec<u8> {
        g.atoms().iter().map(|a| a.hydrogens).collect()
    }

    #[test]
    fn methane() {
        let g = parse_smiles("C").unwrap();
        assert_eq!(g.atom_count(), 1);
        assert!(g.bonds().is_empty());
        assert_eq!(hs(&g), [4]);
    }

    #[test]
    fn benzene() {
        let g = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(g.atom_count(), 6);
        assert_eq!(g.bonds().len(), 6);
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        assert_eq!(hs(&g), [1; 6]);
    }

    #[test]
    fn acetic_acid() {
        let g = parse_smiles("CC(=O)O").unwrap();
        let el: Vec<_> = g.atoms().iter().map(|a| a.element.symbol()).collect();
        assert_eq!(el, ["C", "C", "O", "O"]);
        let b: Vec<_> = g.bonds().iter().map(|b| (b.a, b.b, b.order.valence())).collect();
        assert_eq!(b, [(0, 1, 1), (1, 2, 2), (1, 3, 1)]);
        assert_eq!(hs(&g), [3, 0, 0, 1]);
    }

    #[test]
    fn heteroaromatics() {
        assert_eq!(hs(&parse_smiles("c1ccncc1").unwrap()), [1, 1, 1, 0, 1, 1]);
        assert_eq!(hs(&parse_smiles("c1ccsc1").unwrap()), [1, 1, 1, 0, 1]);
        assert_eq!(hs(&parse_smiles("c1cc[nH]c1").unwrap()), [1, 1, 1, 1, 1]);
        assert_eq!(hs(&parse_smiles("Cn1cccc1").unwrap())[1], 0);
    }

    #[test]
    fn brackets_and_salts() {
        let g = parse_smiles("c1ccccc1[N+](=O)[O-]").unwrap();
        assert_eq!(g.atoms()[6].charge, 1);
        assert_eq!(g.atoms()[8].charge, -1);
        let salt = parse_smiles("[Na+].[Cl-]").unwrap();
        assert_eq!(salt.components().0, 2);
        assert_eq!(salt.shortest_paths().get(0, 1), None);
        let iso = parse_smiles("[13CH4]").unwrap();
        assert_eq!(iso.atoms()[0].hydrogens, 4);
        let chiral = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
        assert_eq!(chiral.atoms()[1].hydrogens, 1);
        assert!(parse_smiles("F/C=C/F").is_ok());
        assert_eq!(parse_smiles("C%12CC%12").unwrap().bonds().len(), 3);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse_smiles("C1CC"), Err(SmilesError::UnmatchedRingClosure { offset: 1 }));
        assert_eq!(parse_smiles("CC(C"), Err(SmilesError::UnmatchedParenthesis { offset: 2 }));
        assert_eq!(parse_smiles("CC)C"), Err(SmilesError::UnmatchedParenthesis { offset: 2 }));
        assert!(matches!(parse_smiles("CXC"), Err(SmilesError::UnknownAtomSymbol { offset: 1, .. })));
        assert!(matches!(parse_smiles("C[Xx]"), Err(SmilesError::UnknownAtomSymbol { offset: 2, .. })));
        assert_eq!(parse_smiles("FC(F)(F)(F)F"), Err(SmilesError::ValenceExceeded { offset: 1 }));
        assert_eq!(parse_smiles("O=O=O"), Err(SmilesError::ValenceExceeded { offset: 2 }));
        assert_eq!(parse_smiles("Ccc"), Err(SmilesError::AromaticOutsideRing { offset: 1 }));
        assert!(parse_smiles("").is_err());
    }

    #[test]
    fn kekule_benzene_is_not_aromatic() {
        let g = parse_smiles("C1=CC=CC=C1").unwrap();
        assert!(g.atoms().iter().all(|a| !a.aromatic));
        assert_eq!(hs(&g), [1; 6]);
    }

    #[test]
    fn sulfur_valence_levels() {
        assert_eq!(hs(&parse_smiles("CS(=O)(=O)C").unwrap())[1], 0);
        assert_eq!(hs(&parse_smiles("CS(=O)C").unwrap())[1], 0);
        assert_eq!(hs(&parse_smiles("CS").unwrap())[1], 1);
    }
}
