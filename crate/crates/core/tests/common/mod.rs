//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use pk_automl::chem::pattern::{BondQuery, HydrogenQuery, PatternAtom};
use pk_automl::chem::{Atom, Bond, BondOrder, Element, MoleculeGraph, Pattern};
use rand::Rng;

/// ln Γ(n/2) for a positive integer n, by the half-integer recurrences.
pub fn ln_gamma_half(n: u32) -> f64 {
    let mut acc = 0.0;
    if n.is_multiple_of(2) {
        // Γ(k) = (k-1)!
        for i in 1..n / 2 {
            acc += f64::from(i).ln();
        }
    } else {
        // Γ(k + 1/2) = Γ(1/2) Π_{i<k} (i + 1/2)
        acc = 0.5 * std::f64::consts::PI.ln();
        for i in 0..(n - 1) / 2 {
            acc += (f64::from(i) + 0.5).ln();
        }
    }
    acc
}

pub fn f_pdf(x: f64, d1: u32, d2: u32) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (a, b) = (f64::from(d1), f64::from(d2));
    let ln_norm = ln_gamma_half(d1 + d2) - ln_gamma_half(d1) - ln_gamma_half(d2) + a / 2.0 * (a / b).ln();
    (ln_norm + (a / 2.0 - 1.0) * x.ln() - (a + b) / 2.0 * (a * x / b).ln_1p()).exp()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Upper tail of the F distribution by quadrature of its density over
/// `[f, inf)`, mapped onto `[0, 1)` with `x = f + t / (1 - t)`.
/// Requires `d2 >= 3` so the mapped integrand vanishes at `t = 1`.
pub fn f_sf_quadrature(f: f64, d1: u32, d2: u32) -> f64 {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let x = f + t / (1.0 - t);
        f_pdf(x, d1, d2) / ((1.0 - t) * (1.0 - t))
    };
    // split so the bulk near t = 0 is resolved separately from the tail
    [0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0].windows(2).map(|w| adaptive_simpson(&g, w[0], w[1], 1e-14)).sum()
}

/// Sum of shortest-path lengths over connected atom pairs, by Floyd-Warshall
/// over heavy atoms.
pub fn floyd_warshall_wiener(m: &MoleculeGraph) -> f64 {
    let heavy: Vec<usize> = (0..m.atom_count()).filter(|&i| m.atoms()[i].element != Element::H).collect();
    let n = heavy.len();
    let pos = |a: usize| heavy.iter().position(|&h| h == a);
    let inf = u64::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for b in m.bonds() {
        if let (Some(i), Some(j)) = (pos(b.a), pos(b.b)) {
            d[i][j] = 1;
            d[j][i] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let mut w = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j] < inf {
                w += d[i][j];
            }
        }
    }
    w as f64
}

fn bond_index(m: &MoleculeGraph, a: usize, b: usize) -> Option<usize> {
    m.bonds().iter().position(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
}

/// Distinct embeddings counted by trying every injective assignment of
/// atom-compatible molecule atoms to pattern atoms, checking bonds last;
/// assignments covering the same atom and bond sets count once.
pub fn brute_force_matches(m: &MoleculeGraph, p: &Pattern) -> usize {
    let k = p.atoms.len();
    let n = m.atom_count();
    if k == 0 || k > n {
        return 0;
    }
    let mut seen: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
    let mut map = vec![0usize; k];
    fn rec(
        depth: usize,
        map: &mut Vec<usize>,
        m: &MoleculeGraph,
        p: &Pattern,
        seen: &mut HashSet<(Vec<usize>, Vec<usize>)>,
    ) {
        if depth == map.len() {
            let mut atoms = map.clone();
            atoms.sort_unstable();
            let mut bonds = Vec::new();
            for &(a, b, q) in &p.bonds {
                match bond_index(m, map[a], map[b]) {
                    Some(bi) if q.matches(m.bonds()[bi].order) => bonds.push(bi),
                    _ => return,
                }
            }
            bonds.sort_unstable();
            seen.insert((atoms, bonds));
            return;
        }
        for c in 0..m.atom_count() {
            if map[..depth].contains(&c) || !p.atoms[depth].matches(m, c) {
                continue;
            }
            map[depth] = c;
            rec(depth + 1, map, m, p, seen);
        }
    }
    rec(0, &mut map, m, p, &mut seen);
    seen.len()
}

/// Benjamini-Hochberg from the step-up definition: hypothesis j is kept
/// when some level i has at least i p-values at or below `i alpha / m` and
/// `p_j` is among them.
pub fn bh_direct(p: &[f64], alpha: f64) -> Vec<bool> {
    let m = p.len();
    let mut keep = vec![false; m];
    for i in 1..=m {
        let t = i as f64 / m as f64 * alpha;
        if p.iter().filter(|&&v| v <= t).count() >= i {
            for (k, &v) in keep.iter_mut().zip(p) {
                *k |= v <= t;
            }
        }
    }
    keep
}

pub fn bonferroni_direct(p: &[f64], alpha: f64) -> Vec<bool> {
    let bound = alpha / p.len() as f64;
    p.iter().map(|&v| v < bound).collect()
}

const ELEMENTS: [Element; 6] = [Element::C, Element::C, Element::C, Element::N, Element::O, Element::S];

/// Random attributed graph with up to `max_atoms` atoms: a random spanning
/// forest plus a few extra ring-closing edges.
pub fn random_molecule<R: Rng>(rng: &mut R, max_atoms: usize) -> MoleculeGraph {
    let n = rng.gen_range(1..=max_atoms);
    let atoms: Vec<Atom> = (0..n)
        .map(|i| Atom {
            element: ELEMENTS[rng.gen_range(0..ELEMENTS.len())],
            charge: if rng.gen_bool(0.1) { rng.gen_range(-1..=1) } else { 0 },
            aromatic: rng.gen_bool(0.3),
            hydrogens: rng.gen_range(0..=3),
            offset: i,
        })
        .collect();
    let mut bonds = Vec::new();
    let order = |rng: &mut R| match rng.gen_range(0..4) {
        0 => BondOrder::Double,
        1 => BondOrder::Aromatic,
        _ => BondOrder::Single,
    };
    for i in 1..n {
        if rng.gen_bool(0.9) {
            let j = rng.gen_range(0..i);
            bonds.push(Bond { a: j, b: i, order: order(rng) });
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && !bonds.iter().any(|x: &Bond| (x.a == a && x.b == b) || (x.a == b && x.b == a)) {
            bonds.push(Bond { a, b, order: order(rng) });
        }
    }
    MoleculeGraph::new(atoms, bonds)
}

/// Random connected pattern of 1 to `max_atoms` atoms.
pub fn random_pattern<R: Rng>(rng: &mut R, max_atoms: usize) -> Pattern {
    let mut p = Pattern::new();
    let n = rng.gen_range(1..=max_atoms);
    for _ in 0..n {
        let mut a = if rng.gen_bool(0.3) {
            PatternAtom::default()
        } else {
            PatternAtom::element(ELEMENTS[rng.gen_range(0..ELEMENTS.len())])
        };
        if rng.gen_bool(0.2) {
            a = a.aromatic();
        }
        if rng.gen_bool(0.2) {
            a = a.hydrogens(HydrogenQuery::AtLeast(1));
        }
        p.atom(a);
    }
    for i in 1..n {
        let q = match rng.gen_range(0..3) {
            0 => BondQuery::Any,
            1 => BondQuery::SingleOrAromatic,
            _ => BondQuery::Order(BondOrder::Single),
        };
        p.bond(rng.gen_range(0..i), i, q);
    }
    p
}
