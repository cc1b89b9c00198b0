//! Crossover, mutation and tournament selection on derivation trees.
use pk_automl::genome::{mutate, tournament_index, whigham_crossover, Individual};
use pk_automl::grammar::random_derivation;
use pk_automl::grammar::shipped::shipped;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let g = shipped();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = Individual::new(random_derivation(g, &mut rng, 20).unwrap(), 0);
    let b = Individual::new(random_derivation(g, &mut rng, 20).unwrap(), 0);
    println!("parent a: {}", a.tree.canonical());
    println!("parent b: {}", b.tree.canonical());

    let (c, d) = whigham_crossover(&a, &b, &mut rng, 1);
    println!("child c:  {}", c.tree.canonical());
    println!("child d:  {}", d.tree.canonical());

    let m = mutate(&c, g, &mut rng, 20, 1);
    println!("mutant:   {}", m.tree.canonical());
    assert!(m.tree.conforms_to(g));

    let fitness = [0.2, 0.7, 0.7, -0.1, 0.5];
    let wins: Vec<usize> = (0..10).map(|_| tournament_index(&fitness, 2, &mut rng)).collect();
    println!("tournament winners over {fitness:?}: {wins:?}");
}
