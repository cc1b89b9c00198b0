//! Friedman, Iman-Davenport and Nemenyi over a dataset x method score table.
use pk_automl::stats::{compare, ScoreTable};

const SCORES: &str = "dataset,ours,baseline_a,baseline_b,baseline_c
d1,0.62,0.55,0.41,0.50
d2,0.48,0.51,0.30,0.44
d3,0.71,0.60,0.52,0.58
d4,0.35,0.36,0.20,0.31
d5,0.57,0.49,0.45,0.47
d6,0.66,0.61,0.40,0.62
";

fn main() {
    let table = ScoreTable::from_csv(SCORES.as_bytes()).unwrap();
    let report = compare(&table, 0.05).unwrap();
    print!("{}", report.to_markdown());
}
