use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::{parse_config, render_config, RunConfig};
use super::dataset::{ingest_csv, sha256_hex, Dataset};
use super::synth::{synth_dataset, SynthKind};
use super::{load_grammar, read_text, write_text, HarnessError};
use crate::chem::{featurize_cached, FeatureGroup, GroupSet, MoleculeGraph};
use crate::fitness::{evaluate_pipeline, stratified_split, FoldSet, TrainData};
use crate::grammar::{parse_sentence, Grammar};
use crate::ml::PipelineSpec;
use crate::rng::derive_seed;
use crate::search::{finalize, log_csv, mean_std, population_std, run_search, PipelineFitness, SearchResult, SelectionCounts};
use crate::stats::{compare, ScoreTable};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOG_FILE: &str = "generations.csv";
pub const BEST_FILE: &str = "best_pipeline.txt";
pub const FITTED_FILE: &str = "fitted_pipeline.json";
pub const REPORT_FILE: &str = "final_report.md";
pub const QUARANTINE_FILE: &str = "quarantine.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: String,
    pub grammar_sha256: String,
    pub dataset_path: String,
    pub dataset_sha256: String,
    pub master_seed: u64,
    pub train_size: usize,
    pub blind_size: usize,
    pub quarantined: usize,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |error| HarnessError::Io { path: path.to_path_buf(), error }
}

/// Train/blind split shared by `search` and `evaluate`.
pub struct Split {
    pub train: Vec<usize>,
    pub blind: Vec<usize>,
}

pub fn split_dataset(d: &Dataset, train_fraction: f64, master_seed: u64) -> Result<Split, HarnessError> {
    let (train, blind) = stratified_split(&d.labels(), train_fraction, derive_seed(master_seed, "split", 0, 0))
        .map_err(HarnessError::Fitness)?;
    Ok(Split { train, blind })
}

/// Checks that train and blind partition `0..n` and that every fold index
/// addresses the training subset only.
pub fn assert_blind_isolation(split: &Split, n: usize, folds: &FoldSet) -> Result<(), HarnessError> {
    let mut seen = vec![0u8; n];
    for &i in split.train.iter().chain(&split.blind) {
        if i >= n {
            return Err(HarnessError::BlindLeak(format!("index {i} outside dataset")));
        }
        seen[i] += 1;
    }
    if let Some(i) = seen.iter().position(|&c| c != 1) {
        return Err(HarnessError::BlindLeak(format!("row {i} is not in exactly one of train and blind")));
    }
    let mut covered = vec![false; split.train.len()];
    for &i in folds.folds.iter().flatten() {
        if i >= split.train.len() || covered[i] {
            return Err(HarnessError::BlindLeak(format!("fold index {i} is not a unique training row")));
        }
        covered[i] = true;
    }
    if covered.iter().any(|c| !c) {
        return Err(HarnessError::BlindLeak("folds do not cover the training rows".into()));
    }
    Ok(())
}

fn subset<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    pub config: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub grammar: Option<PathBuf>,
    pub out: PathBuf,
    pub desk: bool,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
}

pub struct SearchOutcome {
    pub result: SearchResult,
    pub report: crate::search::FinalReport,
    pub manifest: RunManifest,
}

pub fn resolve_config(opts: &SearchOptions) -> Result<RunConfig, HarnessError> {
    let mut cfg = RunConfig::new(opts.desk);
    if let Some(path) = &opts.config {
        cfg = parse_config(&read_text(path)?, cfg).map_err(HarnessError::Config)?;
    }
    if opts.dataset.is_some() {
        cfg.dataset.clone_from(&opts.dataset);
    }
    if opts.grammar.is_some() {
        cfg.grammar.clone_from(&opts.grammar);
    }
    if opts.jobs.is_some() {
        cfg.search.jobs = opts.jobs;
    }
    if let Some(s) = opts.seed {
        cfg.search.master_seed = s;
    }
    Ok(cfg)
}

/// Full run: split, search on the training part, refit, score the blind
/// part, and write every artifact under `opts.out`.
pub fn cmd_search(opts: &SearchOptions) -> Result<SearchOutcome, HarnessError> {
    let cfg = resolve_config(opts)?;
    let dataset_path = cfg.dataset.clone().ok_or_else(|| HarnessError::Usage("no dataset given".into()))?;
    let (grammar, grammar_text) = load_grammar(cfg.grammar.as_deref())?;
    cfg.search.validate().map_err(HarnessError::Search)?;
    let bytes = std::fs::read(&dataset_path).map_err(io_err(&dataset_path))?;
    let dataset = ingest_csv(&dataset_path).map_err(|error| HarnessError::Ingest { path: dataset_path.clone(), error })?;
    let seed = cfg.search.master_seed;
    let split = split_dataset(&dataset, cfg.train_fraction, seed)?;
    std::fs::create_dir_all(&opts.out).map_err(io_err(&opts.out))?;

    let mut manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        config: render_config(&cfg),
        grammar_sha256: sha256_hex(grammar_text.as_bytes()),
        dataset_path: dataset_path.display().to_string(),
        dataset_sha256: sha256_hex(&bytes),
        master_seed: seed,
        train_size: split.train.len(),
        blind_size: split.blind.len(),
        quarantined: dataset.quarantine.len(),
        started_unix: unix_now(),
        finished_unix: None,
    };
    let manifest_path = opts.out.join(MANIFEST_FILE);
    write_text(&manifest_path, &serde_json::to_string_pretty(&manifest).unwrap())?;
    if !dataset.quarantine.is_empty() {
        write_text(&opts.out.join(QUARANTINE_FILE), &dataset.quarantine_csv())?;
    }

    let labels = dataset.labels();
    let train_mols: Vec<MoleculeGraph> = subset(&dataset.molecules, &split.train);
    let train = TrainData::new(&train_mols, subset(&labels, &split.train), cfg.max_distance);
    let fitness = PipelineFitness {
        data: &train,
        k_folds: cfg.search.k_folds,
        master_seed: seed,
        budget: cfg.search.individual_budget,
    };
    let first = FoldSet::draw(&train.y, cfg.search.k_folds, seed, 0).map_err(HarnessError::Fitness)?;
    assert_blind_isolation(&split, dataset.len(), &first)?;
    let result = run_search(&cfg.search, &grammar, &fitness).map_err(HarnessError::Search)?;
    assert_blind_isolation(&split, dataset.len(), &result.foldset)?;
    write_text(&opts.out.join(LOG_FILE), &log_csv(&result.log, true))?;
    let best_tokens = result.best.tree.sentence();
    write_text(&opts.out.join(BEST_FILE), &(best_tokens.join("\n") + "\n"))?;

    let blind_mols = subset(&dataset.molecules, &split.blind);
    let blind_y = subset(&labels, &split.blind);
    let report = finalize(&result.best, &train, &blind_mols, &blind_y, cfg.max_distance, seed)
        .map_err(HarnessError::Search)?;
    if let Some(p) = &report.pipeline {
        write_text(&opts.out.join(FITTED_FILE), &p.to_json())?;
    }
    let mut md = report.to_markdown(&dataset.name);
    writeln!(md, "Fold set of the CV score: {}. Generations: {}.", result.foldset.id, result.log.len()).unwrap();
    write_text(&opts.out.join(REPORT_FILE), &md)?;
    manifest.finished_unix = Some(unix_now());
    write_text(&manifest_path, &serde_json::to_string_pretty(&manifest).unwrap())?;
    Ok(SearchOutcome { result, report, manifest })
}

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub sentence: PathBuf,
    pub dataset: PathBuf,
    pub grammar: Option<PathBuf>,
    pub seed: u64,
    pub k_folds: usize,
    pub foldset: u64,
    pub train_fraction: f64,
    pub blind: bool,
    pub budget: Duration,
    pub max_distance: usize,
}

impl EvaluateOptions {
    pub fn new(sentence: PathBuf, dataset: PathBuf) -> Self {
        EvaluateOptions {
            sentence,
            dataset,
            grammar: None,
            seed: 0,
            k_folds: 5,
            foldset: 0,
            train_fraction: 0.9,
            blind: false,
            budget: Duration::from_secs(300),
            max_distance: crate::chem::descriptors::DEFAULT_MAX_DISTANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOutcome {
    pub sentence: String,
    pub cv_mean: f64,
    pub cv_std: f64,
    pub status: crate::fitness::EvalStatus,
    pub blind_mcc: Option<f64>,
}

impl EvaluateOutcome {
    pub fn render(&self) -> String {
        let mut s = format!(
            "pipeline: {}\n5-fold CV MCC: {}\nstatus: {}\n",
            self.sentence,
            mean_std(self.cv_mean, self.cv_std),
            self.status
        );
        if let Some(b) = self.blind_mcc {
            writeln!(s, "Blind Test MCC: {b:.3}").unwrap();
        }
        s
    }
}

pub fn read_sentence(path: &Path, grammar: &Grammar) -> Result<PipelineSpec, HarnessError> {
    let text = read_text(path)?;
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let tree = parse_sentence(grammar, &tokens).map_err(HarnessError::Sentence)?;
    PipelineSpec::from_tree(&tree).map_err(HarnessError::Spec)
}

/// Re-scores a persisted sentence with the same split and fold derivation
/// as `search`.
pub fn cmd_evaluate(opts: &EvaluateOptions) -> Result<EvaluateOutcome, HarnessError> {
    let (grammar, _) = load_grammar(opts.grammar.as_deref())?;
    let spec = read_sentence(&opts.sentence, &grammar)?;
    let dataset = ingest_csv(&opts.dataset).map_err(|error| HarnessError::Ingest { path: opts.dataset.clone(), error })?;
    let split = split_dataset(&dataset, opts.train_fraction, opts.seed)?;
    let labels = dataset.labels();
    let train = TrainData::new(&subset(&dataset.molecules, &split.train), subset(&labels, &split.train), opts.max_distance);
    let folds = FoldSet::draw(&train.y, opts.k_folds, opts.seed, opts.foldset).map_err(HarnessError::Fitness)?;
    assert_blind_isolation(&split, dataset.len(), &folds)?;
    let rec = evaluate_pipeline(&spec, &train, &folds, opts.budget, opts.seed);
    let blind_mcc = if opts.blind {
        let best = crate::genome::Individual {
            tree: parse_sentence(&grammar, &spec.tokens()).map_err(HarnessError::Sentence)?,
            fitness: Some(rec.clone()),
            birth_generation: 0,
        };
        let blind_y = subset(&labels, &split.blind);
        let report = finalize(&best, &train, &subset(&dataset.molecules, &split.blind), &blind_y, opts.max_distance, opts.seed)
            .map_err(HarnessError::Search)?;
        Some(report.blind_mcc)
    } else {
        None
    };
    Ok(EvaluateOutcome {
        sentence: spec.sentence(),
        cv_mean: rec.mean_mcc,
        cv_std: population_std(&rec.per_fold_mcc),
        status: rec.status,
        blind_mcc,
    })
}

/// Parses `all` or a comma/space separated list of group tokens.
pub fn parse_groups(text: &str) -> Result<GroupSet, HarnessError> {
    if text.trim() == "all" {
        return Ok(GroupSet::all());
    }
    let mut groups = Vec::new();
    for t in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        groups.push(FeatureGroup::from_token(t).ok_or_else(|| HarnessError::Usage(format!("unknown feature group '{t}'")))?);
    }
    GroupSet::from_groups(&groups).ok_or_else(|| HarnessError::Usage("no feature groups given".into()))
}

/// Writes the feature matrix of the parseable rows; returns a summary line.
pub fn cmd_featurize(
    dataset: &Path,
    groups: GroupSet,
    out: &Path,
    max_distance: usize,
    cache_dir: Option<&Path>,
) -> Result<String, HarnessError> {
    let d = ingest_csv(dataset).map_err(|error| HarnessError::Ingest { path: dataset.to_path_buf(), error })?;
    let smiles = d.smiles();
    let m = match cache_dir {
        Some(dir) => featurize_cached(&smiles, groups, max_distance, dir).map_err(HarnessError::Featurize)?,
        None => crate::chem::featurize::featurize_molecules(&d.molecules, groups, max_distance),
    };
    let file = std::fs::File::create(out).map_err(io_err(out))?;
    m.write_csv(file).map_err(|e| HarnessError::Usage(format!("{}: {e}", out.display())))?;
    let mut s = format!("{} rows x {} columns ({groups}) -> {}\n", m.rows(), m.cols(), out.display());
    for q in &d.quarantine {
        writeln!(s, "quarantined row {} ({}): {}", q.row, q.id, q.error).unwrap();
    }
    Ok(s)
}

/// Writes a synthetic dataset; returns the file's sha256.
pub fn cmd_synth(kind: SynthKind, n: usize, noise: f64, seed: u64, out: &Path) -> Result<String, HarnessError> {
    let d = synth_dataset(kind, n, noise, seed).map_err(HarnessError::Synth)?;
    let csv = d.to_csv();
    write_text(out, &csv)?;
    Ok(sha256_hex(csv.as_bytes()))
}

/// Selection frequencies over the best pipelines of finished run dirs.
pub fn cmd_analyze(runs: &[PathBuf]) -> Result<SelectionCounts, HarnessError> {
    if runs.is_empty() {
        return Err(HarnessError::Usage("no run directories given".into()));
    }
    let mut counts = SelectionCounts::default();
    for dir in runs {
        let text = read_text(&dir.join(BEST_FILE))?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        counts.add(&PipelineSpec::from_tokens(&tokens).map_err(HarnessError::Spec)?);
    }
    Ok(counts)
}

/// Runs the rank statistics on a score CSV. With `out`, writes
/// `ranks.csv`, `summary.csv` and `comparison.md` there. Returns markdown.
pub fn cmd_compare(scores: &Path, alpha: f64, out: Option<&Path>) -> Result<String, HarnessError> {
    let file = std::fs::File::open(scores).map_err(io_err(scores))?;
    let table = ScoreTable::from_csv(file).map_err(HarnessError::Stats)?;
    let report = compare(&table, alpha).map_err(HarnessError::Stats)?;
    let md = report.to_markdown();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_text(&dir.join("ranks.csv"), &report.to_csv())?;
        write_text(&dir.join("summary.csv"), &report.summary_csv())?;
        write_text(&dir.join("comparison.md"), &md)?;
    }
    Ok(md)
}

/// Validation report for a grammar; errors when it is not clean.
pub fn cmd_validate_grammar(path: Option<&Path>) -> Result<String, HarnessError> {
    let (g, _) = load_grammar(path)?;
    let report = g.validate();
    if !report.is_clean() {
        return Err(HarnessError::InvalidGrammar(report.to_string().trim_end().replace('\n', "; ")));
    }
    let st = g.stats();
    let mut s = format!("{report}\nrules: {}, nonterminals: {}, terminals: {}\n", st.rules, st.nonterminals, st.terminals);
    if let Some(r) = g.rule("feature_definition") {
        writeln!(s, "feature-group combinations: {}", r.alternatives.len()).unwrap();
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_parsing() {
        assert_eq!(parse_groups("all").unwrap(), GroupSet::all());
        let g = parse_groups("Toxicophores, Fragments").unwrap();
        assert_eq!(g.groups(), [FeatureGroup::Toxicophores, FeatureGroup::Fragments]);
        assert!(parse_groups("Bogus").is_err());
        assert!(parse_groups("").is_err());
    }

    #[test]
    fn isolation_check_catches_overlap() {
        let folds = FoldSet { id: 0, folds: vec![vec![0], vec![1]] };
        let ok = Split { train: vec![0, 2], blind: vec![1] };
        assert!(assert_blind_isolation(&ok, 3, &folds).is_ok());
        let overlap = Split { train: vec![0, 1], blind: vec![1, 2] };
        assert!(matches!(assert_blind_isolation(&overlap, 3, &folds), Err(HarnessError::BlindLeak(_))));
        let short = FoldSet { id: 0, folds: vec![vec![0], vec![2]] };
        assert!(assert_blind_isolation(&ok, 3, &short).is_err());
    }

    #[test]
    fn shipped_grammar_validates() {
        let s = cmd_validate_grammar(None).unwrap();
        assert!(s.contains("feature-group combinations: 31"), "{s}");
    }

    #[test]
    fn missing_grammar_names_file() {
        let e = cmd_validate_grammar(Some(Path::new("/nonexistent/g.bnf"))).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/g.bnf"));
    }
}
