//! A small evolutionary search on a synthetic set, then a blind-split check.
use pk_automl::fitness::TrainData;
use pk_automl::grammar::shipped::shipped;
use pk_automl::harness::{split_dataset, synth_dataset, SynthKind};
use pk_automl::search::{finalize, run_search, PipelineFitness, SearchConfig};

fn main() {
    let d = synth_dataset(SynthKind::NitroRule, 200, 0.0, 1).unwrap();
    let cfg = SearchConfig { master_seed: 1, ..SearchConfig::desk() };
    let split = split_dataset(&d, 0.9, cfg.master_seed).unwrap();
    let labels = d.labels();
    let pick = |idx: &[usize]| -> (Vec<_>, Vec<u8>) {
        (idx.iter().map(|&i| d.molecules[i].clone()).collect(), idx.iter().map(|&i| labels[i]).collect())
    };
    let (train_m, train_y) = pick(&split.train);
    let (blind_m, blind_y) = pick(&split.blind);

    let train = TrainData::new(&train_m, train_y, 6);
    let fitness = PipelineFitness { data: &train, k_folds: cfg.k_folds, master_seed: cfg.master_seed, budget: cfg.individual_budget };
    let result = run_search(&cfg, shipped(), &fitness).unwrap();
    for g in &result.log {
        println!("gen {:2} best {:.3} mean {:.3} evals {}", g.generation, g.best_mcc, g.mean_mcc, g.evals);
    }
    let report = finalize(&result.best, &train, &blind_m, &blind_y, 6, cfg.master_seed).unwrap();
    print!("{}", report.to_markdown(&d.name));
}
