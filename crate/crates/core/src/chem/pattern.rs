//! Small attributed-graph patterns and exact embedding counts.

use std::collections::HashSet;
use std::fmt;

use super::graph::{BondOrder, Element, MoleculeGraph};

pub const MAX_PATTERN_ATOMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternError {
    TooLarge { atoms: usize },
}

impl fmt::Display for PatternError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternError::TooLarge { atoms } => {
                write!(f, "pattern has {atoms} atoms, limit is {MAX_PATTERN_ATOMS}")
            }
        }
    }
}

impl std::error::Error for PatternError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HydrogenQuery {
    Exactly(u32),
    AtLeast(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PatternAtom {
    /// Allowed elements; empty means any.
    pub elements: Vec<Element>,
    pub aromatic: Option<bool>,
    pub charge: Option<i32>,
    pub hydrogens: Option<HydrogenQuery>,
    pub heavy_degree: Option<usize>,
}

impl PatternAtom {
    pub fn element(e: Element) -> Self {
        PatternAtom { elements: vec![e], ..Default::default() }
    }

    pub fn any_of(es: &[Element]) -> Self {
        PatternAtom { elements: es.to_vec(), ..Default::default() }
    }

    pub fn aliphatic(mut self) -> Self {
        self.aromatic = Some(false);
        self
    }

    pub fn aromatic(mut self) -> Self {
        self.aromatic = Some(true);
        self
    }

    pub fn charge(mut self, c: i32) -> Self {
        self.charge = Some(c);
        self
    }

    pub fn hydrogens(mut self, q: HydrogenQuery) -> Self {
        self.hydrogens = Some(q);
        self
    }

    pub fn heavy_degree(mut self, d: usize) -> Self {
        self.heavy_degree = Some(d);
        self
    }

    pub fn matches(&self, m: &MoleculeGraph, i: usize) -> bool {
        let a = &m.atoms()[i];
        if !self.elements.is_empty() && !self.elements.contains(&a.element) {
            return false;
        }
        if self.aromatic.is_some_and(|x| x != a.aromatic) || self.charge.is_some_and(|c| c != a.charge) {
            return false;
        }
        let h = m.total_hydrogens(i);
        match self.hydrogens {
            Some(HydrogenQuery::Exactly(n)) if h != n => return false,
            Some(HydrogenQuery::AtLeast(n)) if h < n => return false,
            _ => {}
        }
        self.heavy_degree.is_none_or(|d| m.heavy_degree(i) == d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondQuery {
    Order(BondOrder),
    SingleOrAromatic,
    Any,
}

impl BondQuery {
    pub fn matches(self, order: BondOrder) -> bool {
        match self {
            BondQuery::Order(o) => o == order,
            BondQuery::SingleOrAromatic => matches!(order, BondOrder::Single | BondOrder::Aromatic),
            BondQuery::Any => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Pattern {
    pub atoms: Vec<PatternAtom>,
    pub bonds: Vec<(usize, usize, BondQuery)>,
}

impl Pattern {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn atom(&mut self, a: PatternAtom) -> usize {
        self.atoms.push(a);
        self.atoms.len() - 1
    }

    pub fn bond(&mut self, a: usize, b: usize, q: BondQuery) -> &mut Self {
        self.bonds.push((a, b, q));
        self
    }

    fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, BondQuery)> + '_ {
        self.bonds.iter().filter_map(move |&(a, b, q)| {
            if a == i {
                Some((b, q))
            } else if b == i {
                Some((a, q))
            } else {
                None
            }
        })
    }

    /// Visit order: each component in BFS order so later atoms usually have
    /// an already-mapped neighbor to anchor the candidate set.
    fn search_order(&self) -> Vec<usize> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let start = order.len();
            order.push(s);
            let mut k = start;
            while k < order.len() {
                let u = order[k];
                k += 1;
                for (v, _) in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        order.push(v);
                    }
                }
            }
        }
        order
    }
}

/// One embedding: `atoms[k]` is the molecule atom matched by pattern atom `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub atoms: Vec<usize>,
}

struct Search<'a> {
    m: &'a MoleculeGraph,
    p: &'a Pattern,
    order: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
    seen: HashSet<(Vec<usize>, Vec<usize>)>,
    found: Vec<Embedding>,
}

impl Search<'_> {
    fn consistent(&self, k: usize, cand: usize) -> bool {
        if self.used[cand] || !self.p.atoms[k].matches(self.m, cand) {
            return false;
        }
        self.p.neighbors(k).all(|(j, q)| {
            let mapped = self.map[j];
            mapped == usize::MAX || self.m.bond_between(cand, mapped).is_some_and(|b| q.matches(b.order))
        })
    }

    fn record(&mut self) {
        let mut atoms = self.map.clone();
        atoms.sort_unstable();
        let mut bonds: Vec<usize> = self
            .p
            .bonds
            .iter()
            .map(|&(a, b, _)| {
                let (x, y) = (self.map[a], self.map[b]);
                self.m.neighbors(x).iter().find(|(n, _)| *n == y).expect("bond matched").1
            })
            .collect();
        bonds.sort_unstable();
        if self.seen.insert((atoms, bonds)) {
            self.found.push(Embedding { atoms: self.map.clone() });
        }
    }

    fn extend(&mut self, depth: usize) {
        if depth == self.order.len() {
            self.record();
            return;
        }
        let k = self.order[depth];
        let anchor = self.p.neighbors(k).map(|(j, _)| j).find(|&j| self.map[j] != usize::MAX);
        let candidates: Vec<usize> = match anchor {
            Some(j) => self.m.neighbors(self.map[j]).iter().map(|&(n, _)| n).collect(),
            None => (0..self.m.atom_count()).collect(),
        };
        for c in candidates {
            if self.consistent(k, c) {
                self.map[k] = c;
                self.used[c] = true;
                self.extend(depth + 1);
                self.used[c] = false;
                self.map[k] = usize::MAX;
            }
        }
    }
}

/// Distinct embeddings of `p` in `m`; embeddings covering the same atom and
/// bond sets (pattern automorphisms) are reported once.
pub fn embeddings(m: &MoleculeGraph, p: &Pattern) -> Result<Vec<Embedding>, PatternError> {
    if p.atoms.len() > MAX_PATTERN_ATOMS {
        return Err(PatternError::TooLarge { atoms: p.atoms.len() });
    }
    if p.atoms.is_empty() {
        return Ok(Vec::new());
    }
    let mut s = Search {
        m,
        p,
        order: p.search_order(),
        map: vec![usize::MAX; p.atoms.len()],
        used: vec![false; m.atom_count()],
        seen: HashSet::new(),
        found: Vec::new(),
    };
    s.extend(0);
    Ok(s.found)
}

pub fn match_pattern(m: &MoleculeGraph, p: &Pattern) -> Result<usize, PatternError> {
    embeddings(m, p).map(|e| e.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::smiles::parse_smiles;

    fn cc() -> Pattern {
        let mut p = Pattern::new();
        let a = p.atom(PatternAtom::element(Element::C));
        let b = p.atom(PatternAtom::element(Element::C));
        p.bond(a, b, BondQuery::Any);
        p
    }

    #[test]
    fn cc_on_propane() {
        assert_eq!(match_pattern(&parse_smiles("CCC").unwrap(), &cc()).unwrap(), 2);
        assert_eq!(match_pattern(&parse_smiles("O").unwrap(), &cc()).unwrap(), 0);
        assert_eq!(match_pattern(&parse_smiles("c1ccccc1").unwrap(), &cc()).unwrap(), 6);
    }

    #[test]
    fn too_large() {
        let mut p = Pattern::new();
        for _ in 0..9 {
            p.atom(PatternAtom::default());
        }
        assert_eq!(match_pattern(&parse_smiles("C").unwrap(), &p), Err(PatternError::TooLarge { atoms: 9 }));
    }

    #[test]
    fn triangle_counted_once() {
        let mut p = Pattern::new();
        let a = p.atom(PatternAtom::default());
        let b = p.atom(PatternAtom::default());
        let c = p.atom(PatternAtom::default());
        p.bond(a, b, BondQuery::Any).bond(b, c, BondQuery::Any).bond(c, a, BondQuery::Any);
        assert_eq!(match_pattern(&parse_smiles("C1CC1").unwrap(), &p).unwrap(), 1);
    }
}
