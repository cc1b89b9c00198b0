//! General, topological and signature descriptor groups.

use super::graph::{BondOrder, Element, MoleculeGraph};

pub const COUNTED_ELEMENTS: [Element; 10] = [
    Element::B,
    Element::C,
    Element::N,
    Element::O,
    Element::P,
    Element::S,
    Element::F,
    Element::CL,
    Element::BR,
    Element::I,
];

pub fn general_names() -> Vec<String> {
    let mut names = vec!["mol_weight".to_string(), "heavy_atoms".to_string()];
    names.extend(COUNTED_ELEMENTS.iter().map(|e| format!("count_{e}")));
    names.extend(
        ["aromatic_atoms", "rings", "hbond_donors", "hbond_acceptors", "rotatable_bonds", "formal_charge"]
            .map(String::from),
    );
    names
}

pub fn general_descriptors(m: &MoleculeGraph) -> Vec<f64> {
    let atoms = m.atoms();
    let heavy: Vec<usize> = (0..atoms.len()).filter(|&i| atoms[i].element != Element::H).collect();
    let weight: f64 =
        atoms.iter().map(|a| a.element.mass() + f64::from(a.hydrogens) * Element::H.mass()).sum();
    let mut out = vec![weight, heavy.len() as f64];
    for e in COUNTED_ELEMENTS {
        out.push(atoms.iter().filter(|a| a.element == e).count() as f64);
    }
    let hg = m.heavy_atom_graph();
    let (components, _) = hg.components();
    let rings = hg.bonds().len() as f64 - hg.atom_count() as f64 + components as f64;
    let donors = heavy.iter().filter(|&&i| atoms[i].element.is_hetero_no() && m.total_hydrogens(i) >= 1).count();
    let acceptors = heavy.iter().filter(|&&i| atoms[i].element.is_hetero_no()).count();
    let rotatable = (0..hg.bonds().len())
        .filter(|&k| {
            let b = hg.bonds()[k];
            b.order == BondOrder::Single && !hg.is_ring_bond(k) && hg.degree(b.a) >= 2 && hg.degree(b.b) >= 2
        })
        .count();
    out.extend([
        heavy.iter().filter(|&&i| atoms[i].aromatic).count() as f64,
        rings,
        donors as f64,
        acceptors as f64,
        rotatable as f64,
        atoms.iter().map(|a| f64::from(a.charge)).sum(),
    ]);
    out
}

pub fn advanced_names() -> Vec<String> {
    ["wiener", "randic", "zagreb1", "zagreb2", "radius", "diameter"].map(String::from).to_vec()
}

/// Topological indices on the heavy-atom graph, summed over components.
pub fn advanced_descriptors(m: &MoleculeGraph) -> Vec<f64> {
    let g = m.heavy_atom_graph();
    let n = g.atom_count();
    let d = g.shortest_paths();
    let (nc, comp) = g.components();
    let mut wiener = 0.0;
    let mut ecc = vec![0u32; n];
    for i in 0..n {
        for j in 0..n {
            if let Some(x) = d.get(i, j) {
                if i < j {
                    wiener += f64::from(x);
                }
                ecc[i] = ecc[i].max(x);
            }
        }
    }
    let deg: Vec<f64> = (0..n).map(|i| g.degree(i) as f64).collect();
    let mut randic = 0.0;
    let mut zagreb2 = 0.0;
    for b in g.bonds() {
        let p = deg[b.a] * deg[b.b];
        randic += 1.0 / p.sqrt();
        zagreb2 += p;
    }
    let zagreb1: f64 = deg.iter().map(|x| x * x).sum();
    let mut radius = vec![u32::MAX; nc];
    let mut diameter = vec![0u32; nc];
    for i in 0..n {
        radius[comp[i]] = radius[comp[i]].min(ecc[i]);
        diameter[comp[i]] = diameter[comp[i]].max(ecc[i]);
    }
    let clean = |v: f64| if v.is_finite() { v } else { 0.0 };
    vec![
        wiener,
        clean(randic),
        zagreb1,
        zagreb2,
        radius.iter().map(|&r| f64::from(r)).sum(),
        diameter.iter().map(|&r| f64::from(r)).sum(),
    ]
}

pub const SIGNATURE_CLASSES: [&str; 6] = ["hydrophobic", "donor", "acceptor", "positive", "negative", "aromatic"];
pub const DEFAULT_MAX_DISTANCE: usize = 6;

/// Pharmacophore class bitmask per heavy atom of `g`.
pub fn pharmacophore_classes(g: &MoleculeGraph) -> Vec<u8> {
    (0..g.atom_count())
        .map(|i| {
            let a = &g.atoms()[i];
            let mut mask = 0u8;
            let polar_neighbor = g.neighbors(i).iter().any(|&(j, _)| g.atoms()[j].element.is_hetero_no());
            if matches!(a.element, Element::C | Element::S) && !polar_neighbor {
                mask |= 1;
            }
            if a.element.is_hetero_no() {
                if g.total_hydrogens(i) >= 1 {
                    mask |= 2;
                }
                mask |= 4;
            }
            if a.charge > 0 {
                mask |= 8;
            }
            if a.charge < 0 {
                mask |= 16;
            }
            if a.aromatic {
                mask |= 32;
            }
            mask
        })
        .collect()
}

/// Unordered class pairs `(p, q)` with `p <= q`, in lexicographic order.
pub fn class_pairs() -> Vec<(usize, usize)> {
    let k = SIGNATURE_CLASSES.len();
    (0..k).flat_map(|p| (p..k).map(move |q| (p, q))).collect()
}

pub fn signature_names(max_distance: usize) -> Vec<String> {
    class_pairs()
        .into_iter()
        .flat_map(|(p, q)| {
            (1..=max_distance).map(move |d| format!("{}_{}_d{d}", SIGNATURE_CLASSES[p], SIGNATURE_CLASSES[q]))
        })
        .collect()
}

/// Cumulative distance-bounded class-pair counts over heavy atoms.
pub fn graph_signatures(m: &MoleculeGraph, max_distance: usize) -> Vec<f64> {
    let g = m.heavy_atom_graph();
    let n = g.atom_count();
    let classes = pharmacophore_classes(&g);
    let d = g.shortest_paths();
    let pairs = class_pairs();
    // histogram per class pair of exact distances 1..=D
    let mut hist = vec![0u64; pairs.len() * max_distance];
    for u in 0..n {
        for v in u + 1..n {
            let Some(dist) = d.get(u, v) else { continue };
            let dist = dist as usize;
            if dist == 0 || dist > max_distance {
                continue;
            }
            let (cu, cv) = (classes[u], classes[v]);
            for (k, &(p, q)) in pairs.iter().enumerate() {
                let hit = (cu >> p & 1 == 1 && cv >> q & 1 == 1) || (cu >> q & 1 == 1 && cv >> p & 1 == 1);
                if hit {
                    hist[k * max_distance + dist - 1] += 1;
                }
            }
        }
    }
    let mut out = Vec::with_capacity(hist.len());
    for k in 0..pairs.len() {
        let mut acc = 0u64;
        for dd in 0..max_distance {
            acc += hist[k * max_distance + dd];
            out.push(acc as f64);
        }
    }
    out
}
