//! Fits a pipeline sentence, predicts, and round-trips it through JSON.
use pk_automl::chem::descriptors::DEFAULT_MAX_DISTANCE;
use pk_automl::chem::featurize;
use pk_automl::grammar::parse_sentence;
use pk_automl::grammar::shipped::shipped;
use pk_automl::harness::{synth_dataset, SynthKind};
use pk_automl::ml::{Deadline, FittedPipeline, PipelineSpec};

fn main() {
    let g = shipped();
    let sentence = "General_Descriptors Toxicophores MinMaxScaler SelectPercentile 50 RandomForest 100 None 2";
    let tokens: Vec<&str> = sentence.split_whitespace().collect();
    let spec = match parse_sentence(g, &tokens) {
        Ok(tree) => PipelineSpec::from_tree(&tree).unwrap(),
        Err(e) => {
            eprintln!("sentence rejected: {e}");
            return;
        }
    };

    let d = synth_dataset(SynthKind::NitroRule, 120, 0.0, 9).unwrap();
    let x = featurize(&d.smiles(), spec.groups, DEFAULT_MAX_DISTANCE).unwrap();
    let fitted = FittedPipeline::fit(&spec, &x, &d.labels(), 0, Deadline::none()).unwrap();
    println!("kept {} of {} columns", fitted.kept.len(), x.names.len());

    let json = fitted.to_json();
    let restored = FittedPipeline::from_json(&json, g).unwrap();
    assert_eq!(restored.predict(&x).unwrap(), fitted.predict(&x).unwrap());
    println!("{} bytes of JSON, predictions identical after reload", json.len());
}
