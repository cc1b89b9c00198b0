use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pk-automl"));
    c.env_remove("PK_AUTOML_GRAMMAR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn line_after<'a>(text: &'a str, prefix: &str) -> &'a str {
    text.lines().find_map(|l| l.strip_prefix(prefix)).unwrap_or_else(|| panic!("no '{prefix}' in:\n{text}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn validate_shipped_grammar() {
    let o = run(&["validate-grammar"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("feature-group combinations: 31"));
}

#[test]
fn missing_grammar_names_the_file() {
    let o = run(&["validate-grammar", "/nonexistent/custom.bnf"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/nonexistent/custom.bnf"), "{}", stderr(&o));

    let o = bin().env("PK_AUTOML_GRAMMAR", "/nonexistent/env.bnf").arg("validate-grammar").output().unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/nonexistent/env.bnf"));
}

#[test]
fn broken_grammar_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("broken.bnf");
    std::fs::write(&g, "<start> ::= <missing>\n").unwrap();
    let o = run(&["validate-grammar", p(&g)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
    assert!(stderr(&o).contains("<missing>"));
}

#[test]
fn synth_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    let digest = |out: &Path, seed: &str| {
        let o = run(&["synth", "--kind", "mw-threshold", "--n", "60", "--seed", seed, "--out", p(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o).split_whitespace().last().unwrap().to_owned()
    };
    assert_eq!(digest(&a, "4"), digest(&b, "4"));
    assert_ne!(digest(&a, "4"), digest(&c, "5"));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn unknown_synth_kind_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--kind", "bogus", "--out", p(&dir.path().join("x.csv"))]);
    assert!(!o.status.success());
}

#[test]
fn compare_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    std::fs::write(&scores, "dataset,a,b,c\nd1,0.9,0.5,0.1\nd2,0.8,0.6,0.2\nd3,0.7,0.4,0.3\nd4,0.9,0.2,0.1\n").unwrap();
    let out = dir.path().join("cmp");
    let o = run(&["compare", p(&scores), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["ranks.csv", "summary.csv", "comparison.md"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn featurize_writes_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    assert!(run(&["synth", "--kind", "nitro-rule", "--n", "30", "--out", p(&data)]).status.success());
    let out = dir.path().join("f.csv");
    let o = run(&["featurize", "--dataset", p(&data), "--groups", "all", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 31);
    let o = run(&["featurize", "--dataset", p(&data), "--groups", "nonsense", "--out", p(&out)]);
    assert!(!o.status.success());
}

#[test]
fn search_then_evaluate_reproduces_cv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    assert!(run(&["synth", "--kind", "nitro-rule", "--n", "120", "--seed", "2", "--out", p(&data)]).status.success());
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "population_size = 8\nmax_generations = 2\nresample_period = 5\n").unwrap();
    let out = dir.path().join("run");
    let o = run(&["search", "--dataset", p(&data), "--config", p(&cfg), "--out", p(&out), "--seed", "7", "--jobs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let printed = stdout(&o);
    let cv = line_after(&printed, "5-fold CV MCC: ").to_owned();
    for f in ["manifest.json", "generations.csv", "best_pipeline.txt", "fitted_pipeline.json", "final_report.md"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let report = std::fs::read_to_string(out.join("final_report.md")).unwrap();
    assert!(report.contains("| Dataset | 5-fold CV | Blind Test |"));
    let foldset = line_after(&report, "Fold set of the CV score: ").split('.').next().unwrap().to_owned();

    let e = run(&[
        "evaluate",
        "--sentence",
        p(&out.join("best_pipeline.txt")),
        "--dataset",
        p(&data),
        "--seed",
        "7",
        "--foldset",
        &foldset,
    ]);
    assert!(e.status.success(), "{}", stderr(&e));
    assert_eq!(line_after(&stdout(&e), "5-fold CV MCC: "), cv);

    let a = run(&["analyze", p(&out)]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(stdout(&a).contains("classifier"), "{}", stdout(&a));
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "populaton_size = 8\n").unwrap();
    let o = run(&["search", "--config", p(&cfg), "--out", p(&dir.path().join("r"))]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("populaton_size"), "{}", stderr(&o));
}
