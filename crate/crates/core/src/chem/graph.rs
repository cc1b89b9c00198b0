use std::collections::VecDeque;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(u8);

struct ElementInfo {
    number: u8,
    symbol: &'static str,
    mass: f64,
}

// IUPAC standard atomic weights (abridged, conventional values).
const ELEMENTS: &[ElementInfo] = &[
    ElementInfo { number: 1, symbol: "H", mass: 1.008 },
    ElementInfo { number: 3, symbol: "Li", mass: 6.94 },
    ElementInfo { number: 5, symbol: "B", mass: 10.81 },
    ElementInfo { number: 6, symbol: "C", mass: 12.011 },
    ElementInfo { number: 7, symbol: "N", mass: 14.007 },
    ElementInfo { number: 8, symbol: "O", mass: 15.999 },
    ElementInfo { number: 9, symbol: "F", mass: 18.998 },
    ElementInfo { number: 11, symbol: "Na", mass: 22.990 },
    ElementInfo { number: 12, symbol: "Mg", mass: 24.305 },
    ElementInfo { number: 13, symbol: "Al", mass: 26.982 },
    ElementInfo { number: 14, symbol: "Si", mass: 28.085 },
    ElementInfo { number: 15, symbol: "P", mass: 30.974 },
    ElementInfo { number: 16, symbol: "S", mass: 32.06 },
    ElementInfo { number: 17, symbol: "Cl", mass: 35.45 },
    ElementInfo { number: 19, symbol: "K", mass: 39.098 },
    ElementInfo { number: 20, symbol: "Ca", mass: 40.078 },
    ElementInfo { number: 25, symbol: "Mn", mass: 54.938 },
    ElementInfo { number: 26, symbol: "Fe", mass: 55.845 },
    ElementInfo { number: 27, symbol: "Co", mass: 58.933 },
    ElementInfo { number: 28, symbol: "Ni", mass: 58.693 },
    ElementInfo { number: 29, symbol: "Cu", mass: 63.546 },
    ElementInfo { number: 30, symbol: "Zn", mass: 65.38 },
    ElementInfo { number: 33, symbol: "As", mass: 74.922 },
    ElementInfo { number: 34, symbol: "Se", mass: 78.971 },
    ElementInfo { number: 35, symbol: "Br", mass: 79.904 },
    ElementInfo { number: 47, symbol: "Ag", mass: 107.87 },
    ElementInfo { number: 50, symbol: "Sn", mass: 118.71 },
    ElementInfo { number: 53, symbol: "I", mass: 126.90 },
    ElementInfo { number: 78, symbol: "Pt", mass: 195.08 },
    ElementInfo { number: 79, symbol: "Au", mass: 196.97 },
    ElementInfo { number: 80, symbol: "Hg", mass: 200.59 },
];

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        ELEMENTS.iter().find(|e| e.symbol == symbol).map(|e| Element(e.number))
    }

    fn info(self) -> &'static ElementInfo {
        ELEMENTS.iter().find(|e| e.number == self.0).expect("constructed from table")
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        self.info().symbol
    }

    pub fn mass(self) -> f64 {
        self.info().mass
    }

    /// Allowed valences for organic-subset atoms, ascending.
    pub fn default_valences(self) -> &'static [u8] {
        match self.0 {
            5 => &[3],
            6 => &[4],
            7 => &[3],
            8 => &[2],
            15 => &[3, 5],
            16 => &[2, 4, 6],
            9 | 17 | 35 | 53 => &[1],
            _ => &[],
        }
    }

    pub fn is_hetero_no(self) -> bool {
        self == Element::N || self == Element::O
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to an atom's explicit valence; aromatic counts as one.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub element: Element,
    pub charge: i32,
    pub aromatic: bool,
    /// Attached hydrogens not present as explicit atoms.
    pub hydrogens: u8,
    /// Character offset in the source SMILES.
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// A molecule as an attributed graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    ring_bond: Vec<bool>,
}

pub const UNREACHABLE: u32 = u32::MAX;

/// All-pairs bond-count distances; [`UNREACHABLE`] across components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn raw(&self, i: usize, j: usize) -> u32 {
        self.d[i * self.n + j]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        let v = self.raw(i, j);
        (v != UNREACHABLE).then_some(v)
    }
}

impl MoleculeGraph {
    /// Builds a graph; callers guarantee endpoints are valid and distinct.
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Self {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (k, b) in bonds.iter().enumerate() {
            adjacency[b.a].push((b.b, k));
            adjacency[b.b].push((b.a, k));
        }
        let mut g = MoleculeGraph { atoms, bonds, adjacency, ring_bond: Vec::new() };
        g.ring_bond = g.find_ring_bonds();
        g
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// `(neighbor, bond index)` pairs of an atom.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a].iter().find(|(n, _)| *n == b).map(|&(_, k)| &self.bonds[k])
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    /// Neighbors that are not hydrogen atoms.
    pub fn heavy_degree(&self, atom: usize) -> usize {
        self.adjacency[atom].iter().filter(|(n, _)| self.atoms[*n].element != Element::H).count()
    }

    /// Total attached hydrogens: implicit/bracket count plus explicit H atoms.
    pub fn total_hydrogens(&self, atom: usize) -> u32 {
        u32::from(self.atoms[atom].hydrogens)
            + self.adjacency[atom].iter().filter(|(n, _)| self.atoms[*n].element == Element::H).count() as u32
    }

    pub fn explicit_valence(&self, atom: usize) -> u32 {
        self.adjacency[atom].iter().map(|&(_, k)| u32::from(self.bonds[k].order.valence())).sum()
    }

    pub fn is_ring_bond(&self, bond: usize) -> bool {
        self.ring_bond[bond]
    }

    pub fn is_ring_atom(&self, atom: usize) -> bool {
        self.adjacency[atom].iter().any(|&(_, k)| self.ring_bond[k])
    }

    /// Bridges are the non-ring bonds (Tarjan low-link).
    fn find_ring_bonds(&self) -> Vec<bool> {
        let n = self.atoms.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut ring = vec![true; self.bonds.len()];
        let mut timer = 0;
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            // iterative DFS: (atom, parent bond, next neighbor cursor)
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(&mut (u, parent_bond, ref mut cursor)) = stack.last_mut() {
                if let Some(&(v, k)) = self.adjacency[u].get(*cursor) {
                    *cursor += 1;
                    if k == parent_bond {
                        continue;
                    }
                    if disc[v] == usize::MAX {
                        disc[v] = timer;
                        low[v] = timer;
                        timer += 1;
                        stack.push((v, k, 0));
                    } else {
                        low[u] = low[u].min(disc[v]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[u]);
                        if low[u] > disc[p] {
                            ring[parent_bond] = false;
                        }
                    }
                }
            }
        }
        ring
    }

    /// Connected-component id per atom, numbered in order of first atom.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.atoms.len();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adjacency[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }

    /// BFS distances between every atom pair.
    pub fn shortest_paths(&self) -> DistanceMatrix {
        let n = self.atoms.len();
        let mut d = vec![UNREACHABLE; n * n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            let row = &mut d[s * n..(s + 1) * n];
            row[s] = 0;
            queue.clear();
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let du = row[u];
                for &(v, _) in &self.adjacency[u] {
                    if row[v] == UNREACHABLE {
                        row[v] = du + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        DistanceMatrix { n, d }
    }

    /// Copy without explicit hydrogen atoms, folding them into the
    /// hydrogen counts of their neighbors.
    pub fn heavy_atom_graph(&self) -> MoleculeGraph {
        if self.atoms.iter().all(|a| a.element != Element::H) {
            return self.clone();
        }
        let mut map = vec![usize::MAX; self.atoms.len()];
        let mut atoms = Vec::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if a.element != Element::H || self.adjacency[i].is_empty() {
                map[i] = atoms.len();
                let mut a = a.clone();
                a.hydrogens = self.total_hydrogens(i).min(255) as u8;
                atoms.push(a);
            }
        }
        let bonds = self
            .bonds
            .iter()
            .filter(|b| map[b.a] != usize::MAX && map[b.b] != usize::MAX)
            .map(|b| Bond { a: map[b.a], b: map[b.b], order: b.order })
            .collect();
        MoleculeGraph::new(atoms, bonds)
    }
}
