//! Fits every classifier family on a small synthetic matrix.
use pk_automl::fitness::{confusion, mcc};
use pk_automl::matrix::Matrix;
use pk_automl::ml::ensemble::AdaAlgorithm;
use pk_automl::ml::{fit_classifier, ClassifierSpec, Deadline};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let y: Vec<u8> = rows.iter().map(|r| u8::from(r[0] * r[1] > 0.0)).collect();
    let x = Matrix::from_rows(&rows);

    let specs = [
        ClassifierSpec::DecisionTree { max_depth: Some(4), min_samples_split: 2 },
        ClassifierSpec::ExtraTree { max_depth: None, min_samples_split: 2 },
        ClassifierSpec::RandomForest { n_estimators: 50, max_depth: None, min_samples_split: 2 },
        ClassifierSpec::ExtraTrees { n_estimators: 50, max_depth: None, min_samples_split: 2 },
        ClassifierSpec::AdaBoost { algorithm: AdaAlgorithm::Samme, n_estimators: 50, learning_rate_centi: 100 },
        ClassifierSpec::XGBoost { n_estimators: 50, max_depth: Some(3), max_leaves: 8, learning_rate_centi: 30 },
    ];
    for spec in specs {
        let model = fit_classifier(&spec, &x, &y, 1, Deadline::none()).unwrap();
        let pred = model.predict(&x).unwrap();
        println!("{:<12} training MCC {:.3}", spec.name(), mcc(&confusion(&y, &pred).unwrap()));
    }
}
