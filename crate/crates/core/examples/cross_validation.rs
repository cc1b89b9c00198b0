//! Scores one pipeline with stratified k-fold MCC and the fitness cache.
use std::time::Duration;

use pk_automl::fitness::{evaluate_pipeline, FitnessCache, FoldSet, TrainData};
use pk_automl::grammar::parse_sentence;
use pk_automl::grammar::shipped::shipped;
use pk_automl::harness::{synth_dataset, SynthKind};
use pk_automl::ml::PipelineSpec;
use pk_automl::search::{mean_std, population_std};

fn main() {
    let d = synth_dataset(SynthKind::MwThreshold, 200, 0.05, 4).unwrap();
    let data = TrainData::new(&d.molecules, d.labels(), 6);
    let tokens = ["General_Descriptors", "StddScaler", "True", "True", "DecisionTree", "4", "2"];
    let spec = PipelineSpec::from_tree(&parse_sentence(shipped(), &tokens).unwrap()).unwrap();

    let cache = FitnessCache::new();
    for id in 0..3 {
        let folds = FoldSet::draw(&data.y, 5, 42, id).unwrap();
        let key = spec.sentence();
        let rec = match cache.get(&key, id) {
            Some(r) => r,
            None => cache.insert(&key, id, evaluate_pipeline(&spec, &data, &folds, Duration::from_secs(60), 42)),
        };
        println!("fold set {id}: {} {:?}", mean_std(rec.mean_mcc, population_std(&rec.per_fold_mcc)), rec.status);
    }
    println!("cache entries: {}", cache.len());
}
