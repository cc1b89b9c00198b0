//! Samples pipeline sentences from the bundled grammar and parses them back.
use pk_automl::grammar::shipped::shipped;
use pk_automl::grammar::{parse_sentence, random_derivation};
use pk_automl::ml::PipelineSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let g = shipped();
    let report = g.validate();
    let st = g.stats();
    println!("{report}");
    println!("rules {} nonterminals {} terminals {}", st.rules, st.nonterminals, st.terminals);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let tree = random_derivation(g, &mut rng, 20).expect("grammar derives");
        let back = parse_sentence(g, &tree.tokens()).expect("sampled sentence parses");
        assert_eq!(back, tree);
        let spec = PipelineSpec::from_tree(&tree).expect("tree maps to a pipeline");
        println!("depth {:2} | {}", tree.depth(), spec.sentence());
    }
}
