//! Evolutionary operators over derivation-tree genomes.

use std::collections::BTreeMap;

use rand::Rng;

use crate::fitness::FitnessRecord;
use crate::grammar::{expand, DerivationTree, Grammar, Node, NodeLabel};

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub tree: DerivationTree,
    pub fitness: Option<FitnessRecord>,
    pub birth_generation: usize,
}

impl Individual {
    pub fn new(tree: DerivationTree, birth_generation: usize) -> Self {
        Individual { tree, fitness: None, birth_generation }
    }

    /// Mean MCC, or negative infinity when not yet evaluated.
    pub fn fitness_value(&self) -> f64 {
        self.fitness.as_ref().map_or(f64::NEG_INFINITY, |f| f.mean_mcc)
    }
}

fn sites_by_label(tree: &DerivationTree) -> BTreeMap<NodeLabel, Vec<Vec<usize>>> {
    let mut map: BTreeMap<NodeLabel, Vec<Vec<usize>>> = BTreeMap::new();
    for site in tree.internal_sites() {
        map.entry(site.label).or_default().push(site.path);
    }
    map
}

/// Whigham crossover: pick a label shared by both parents uniformly, then one
/// node with that label uniformly in each parent, and swap the subtrees.
///
/// The start symbol is always shared, so a root swap is always possible.
pub fn whigham_crossover<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    rng: &mut R,
    generation: usize,
) -> (Individual, Individual) {
    let sa = sites_by_label(&a.tree);
    let sb = sites_by_label(&b.tree);
    let shared: Vec<&NodeLabel> = sa.keys().filter(|l| sb.contains_key(*l)).collect();
    let label = shared[rng.gen_range(0..shared.len())];
    let pa = &sa[label][rng.gen_range(0..sa[label].len())];
    let pb = &sb[label][rng.gen_range(0..sb[label].len())];
    let mut ta = a.tree.clone();
    let mut tb = b.tree.clone();
    let from_b = b.tree.subtree(pb).clone();
    let from_a = ta.replace_subtree(pa, from_b);
    tb.replace_subtree(pb, from_a);
    (Individual::new(ta, generation), Individual::new(tb, generation))
}

/// Subtree-regrow mutation over a uniformly chosen internal node (optional
/// markers included, so mutation can toggle an optional component).
pub fn mutate<R: Rng + ?Sized>(
    a: &Individual,
    g: &Grammar,
    rng: &mut R,
    depth_limit: usize,
    generation: usize,
) -> Individual {
    let sites = a.tree.internal_sites();
    let site = &sites[rng.gen_range(0..sites.len())];
    let budget = depth_limit.saturating_sub(site.depth_above);
    let mut tree = a.tree.clone();
    let replacement = match &site.label {
        NodeLabel::NonTerminal(sym) => {
            let idx = g.rule_index(sym).expect("tree conforms to grammar");
            if g.min_depth(sym).is_some_and(|d| d <= budget) {
                Some(expand(g, idx, rng, budget))
            } else {
                None
            }
        }
        NodeLabel::Optional(sym) => {
            let idx = g.rule_index(sym).expect("tree conforms to grammar");
            let fits = g.min_depth(sym).is_some_and(|d| d <= budget);
            let expansion = (fits && rng.gen_bool(0.5)).then(|| Box::new(expand(g, idx, rng, budget)));
            Some(Node::Optional { symbol: sym.clone(), expansion })
        }
    };
    if let Some(node) = replacement {
        tree.replace_subtree(&site.path, node);
    }
    Individual::new(tree, generation)
}

/// Tournament selection with replacement over a fitness slice.
///
/// Returns the index of the fittest sampled individual; ties go to the
/// lower index.
pub fn tournament_index<R: Rng + ?Sized>(fitness: &[f64], tournament_size: usize, rng: &mut R) -> usize {
    assert!(!fitness.is_empty(), "empty population");
    assert!(tournament_size >= 1, "tournament size must be positive");
    let mut best = rng.gen_range(0..fitness.len());
    for _ in 1..tournament_size {
        let c = rng.gen_range(0..fitness.len());
        if fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best) {
            best = c;
        }
    }
    best
}

pub fn tournament_select<'a, R: Rng + ?Sized>(
    population: &'a [Individual],
    tournament_size: usize,
    rng: &mut R,
) -> &'a Individual {
    let fitness: Vec<f64> = population.iter().map(Individual::fitness_value).collect();
    &population[tournament_index(&fitness, tournament_size, rng)]
}
