//! Generation-synchronous grammar-guided genetic programming over pipeline
//! derivation trees.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::chem::MoleculeGraph;
use crate::fitness::{
    confusion, evaluate_pipeline, mcc, status_of, EvalStatus, FitnessCache, FitnessError, FitnessRecord, FoldSet,
    TrainData,
};
use crate::genome::{mutate, tournament_index, whigham_crossover, Individual};
use crate::grammar::{random_derivation, DerivationTree, Grammar, GrammarError};
use crate::ml::pipeline::PipelineError;
use crate::ml::{Deadline, FittedPipeline, PipelineSpec, ScalerSpec, SelectorSpec};
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub wall_clock_budget: Duration,
    pub crossover_probability: f64,
    pub mutation_probability: f64,
    pub elitism_size: usize,
    pub resample_period: usize,
    pub individual_budget: Duration,
    pub tournament_size: usize,
    pub k_folds: usize,
    pub master_seed: u64,
    pub depth_limit: usize,
    /// Evaluator threads; `None` uses the global pool, `Some(1)` runs serially.
    pub jobs: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population_size: 100,
            max_generations: 50,
            wall_clock_budget: Duration::from_secs(3600),
            crossover_probability: 0.9,
            mutation_probability: 0.1,
            elitism_size: 1,
            resample_period: 5,
            individual_budget: Duration::from_secs(300),
            tournament_size: 2,
            k_folds: 5,
            master_seed: 0,
            depth_limit: crate::grammar::DEFAULT_DEPTH_LIMIT,
            jobs: None,
        }
    }
}

impl SearchConfig {
    /// Small-run profile for laptops and tests.
    pub fn desk() -> Self {
        SearchConfig {
            population_size: 20,
            max_generations: 10,
            individual_budget: Duration::from_secs(30),
            ..SearchConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |what: &str| Err(SearchError::InvalidConfig(what.to_string()));
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return bad("crossover_probability must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return bad("mutation_probability must lie in [0, 1]");
        }
        if self.population_size == 0 {
            return bad("population_size must be positive");
        }
        if self.elitism_size >= self.population_size {
            return bad("elitism_size must be smaller than population_size");
        }
        if self.resample_period == 0 {
            return bad("resample_period must be at least 1");
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be positive");
        }
        if self.k_folds < 2 {
            return bad("k_folds must be at least 2");
        }
        if self.jobs == Some(0) {
            return bad("jobs must be positive");
        }
        Ok(())
    }
}

#[derive(Debug)]
pub enum SearchError {
    InvalidConfig(String),
    Grammar(GrammarError),
    Data(FitnessError),
    Pipeline(PipelineError),
    ThreadPool(String),
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::InvalidConfig(msg) => write!(f, "invalid search config: {msg}"),
            SearchError::Grammar(e) => write!(f, "{e}"),
            SearchError::Data(e) => write!(f, "{e}"),
            SearchError::Pipeline(e) => write!(f, "final pipeline: {e}"),
            SearchError::ThreadPool(msg) => write!(f, "thread pool: {msg}"),
        }
    }
}

impl std::error::Error for SearchError {}

/// Scores a derivation tree on a fold set.
pub trait Fitness: Sync {
    /// Fold set number `id`; the search draws a new one at each resample.
    fn foldset(&self, id: u64) -> Result<FoldSet, FitnessError>;
    fn evaluate(&self, tree: &DerivationTree, folds: &FoldSet) -> FitnessRecord;
}

/// K-fold pipeline evaluation on the training split.
pub struct PipelineFitness<'a> {
    pub data: &'a TrainData,
    pub k_folds: usize,
    pub master_seed: u64,
    pub budget: Duration,
}

impl Fitness for PipelineFitness<'_> {
    fn foldset(&self, id: u64) -> Result<FoldSet, FitnessError> {
        FoldSet::draw(&self.data.y, self.k_folds, self.master_seed, id)
    }

    fn evaluate(&self, tree: &DerivationTree, folds: &FoldSet) -> FitnessRecord {
        match PipelineSpec::from_tree(tree) {
            Ok(spec) => evaluate_pipeline(&spec, self.data, folds, self.budget, self.master_seed),
            Err(_) => FitnessRecord::failure(EvalStatus::TrainFailure),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationLog {
    pub generation: usize,
    pub best_mcc: f64,
    pub mean_mcc: f64,
    pub std_mcc: f64,
    pub best_sentence: String,
    pub foldset_id: u64,
    pub evals: usize,
    pub cache_hits: usize,
    pub elapsed_s: f64,
}

pub const LOG_HEADER: &str = "generation,best_mcc,mean_mcc,std_mcc,best_sentence,foldset_id,evals,cache_hits,elapsed_s";

impl GenerationLog {
    pub fn csv_row(&self, with_timing: bool) -> String {
        let elapsed = if with_timing { format!("{:.3}", self.elapsed_s) } else { "-".to_string() };
        format!(
            "{},{:.6},{:.6},{:.6},{},{},{},{},{}",
            self.generation,
            self.best_mcc,
            self.mean_mcc,
            self.std_mcc,
            self.best_sentence,
            self.foldset_id,
            self.evals,
            self.cache_hits,
            elapsed
        )
    }
}

/// The log as CSV. Without timing the elapsed column holds `-`, which makes
/// runs comparable byte for byte.
pub fn log_csv(log: &[GenerationLog], with_timing: bool) -> String {
    let mut s = String::from(LOG_HEADER);
    s.push('\n');
    for row in log {
        s.push_str(&row.csv_row(with_timing));
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: Individual,
    pub log: Vec<GenerationLog>,
    pub population: Vec<Individual>,
    pub foldset: FoldSet,
}

/// Index of the fittest individual; ties go to the lower index.
fn best_index(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate() {
        if f > fitness[best] {
            best = i;
        }
    }
    best
}

fn generation_stats(fitness: &[f64]) -> (f64, f64, f64) {
    let n = fitness.len() as f64;
    let mean = fitness.iter().sum::<f64>() / n;
    let var = fitness.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n;
    (fitness[best_index(fitness)], mean, var.sqrt())
}

/// Fills every individual's fitness from the cache, evaluating each distinct
/// uncached sentence once. Returns (evaluations, cache hits).
fn evaluate_population<F: Fitness>(
    population: &mut [Individual],
    fitness: &F,
    folds: &FoldSet,
    cache: &FitnessCache,
    pool: Option<&rayon::ThreadPool>,
) -> (usize, usize) {
    let sentences: Vec<String> = population.iter().map(|i| i.tree.canonical()).collect();
    let mut pending: Vec<usize> = Vec::new();
    let mut seen: HashMap<&str, ()> = HashMap::new();
    for (i, s) in sentences.iter().enumerate() {
        if cache.get(s, folds.id).is_none() && seen.insert(s.as_str(), ()).is_none() {
            pending.push(i);
        }
    }
    let eval = |&i: &usize| fitness.evaluate(&population[i].tree, folds);
    let records: Vec<FitnessRecord> = match pool {
        Some(p) if p.current_num_threads() > 1 => p.install(|| pending.par_iter().map(eval).collect()),
        Some(_) => pending.iter().map(eval).collect(),
        None => pending.par_iter().map(eval).collect(),
    };
    for (&i, r) in pending.iter().zip(records) {
        cache.insert(&sentences[i], folds.id, r);
    }
    for (ind, s) in population.iter_mut().zip(&sentences) {
        ind.fitness = cache.get(s, folds.id);
    }
    (pending.len(), population.len() - pending.len())
}

/// Builds generation `gen + 1` from an evaluated population.
fn breed(population: &[Individual], g: &Grammar, cfg: &SearchConfig, next_gen: usize) -> Vec<Individual> {
    let fitness: Vec<f64> = population.iter().map(Individual::fitness_value).collect();
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
    let mut next: Vec<Individual> = order[..cfg.elitism_size].iter().map(|&i| population[i].clone()).collect();
    let mut pair = 0u64;
    while next.len() < cfg.population_size {
        let mut rng = stream(cfg.master_seed, "breed", next_gen as u64, pair);
        pair += 1;
        let a = &population[tournament_index(&fitness, cfg.tournament_size, &mut rng)];
        let b = &population[tournament_index(&fitness, cfg.tournament_size, &mut rng)];
        let (c1, c2) = if rng.gen_bool(cfg.crossover_probability) {
            whigham_crossover(a, b, &mut rng, next_gen)
        } else {
            (Individual::new(a.tree.clone(), next_gen), Individual::new(b.tree.clone(), next_gen))
        };
        for child in [c1, c2] {
            if next.len() == cfg.population_size {
                break;
            }
            let child = if rng.gen_bool(cfg.mutation_probability) {
                mutate(&child, g, &mut rng, cfg.depth_limit, next_gen)
            } else {
                child
            };
            next.push(child);
        }
    }
    next
}

/// Runs the evolutionary loop. Generation 0 is random; each later generation
/// is bred from the previous one. The run stops after evaluating generation
/// `max_generations` or the first generation that ends past the wall-clock
/// budget, so a run can overshoot the budget by one generation.
pub fn run_search<F: Fitness>(cfg: &SearchConfig, g: &Grammar, fitness: &F) -> Result<SearchResult, SearchError> {
    cfg.validate()?;
    let pool = match cfg.jobs {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SearchError::ThreadPool(e.to_string()))?,
        ),
        None => None,
    };
    let start = Instant::now();
    let cache = FitnessCache::new();
    let mut folds = fitness.foldset(0).map_err(SearchError::Data)?;
    let mut population = (0..cfg.population_size)
        .map(|i| {
            let mut rng = stream(cfg.master_seed, "init", 0, i as u64);
            random_derivation(g, &mut rng, cfg.depth_limit).map(|t| Individual::new(t, 0))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(SearchError::Grammar)?;
    let mut log = Vec::new();
    let mut gen = 0;
    loop {
        if gen > 0 && gen % cfg.resample_period == 0 {
            let id = (gen / cfg.resample_period) as u64;
            folds = fitness.foldset(id).map_err(SearchError::Data)?;
            cache.retain_foldset(id);
            population.iter_mut().for_each(|i| i.fitness = None);
        }
        let (evals, cache_hits) = evaluate_population(&mut population, fitness, &folds, &cache, pool.as_ref());
        let values: Vec<f64> = population.iter().map(Individual::fitness_value).collect();
        let (best_mcc, mean_mcc, std_mcc) = generation_stats(&values);
        log.push(GenerationLog {
            generation: gen,
            best_mcc,
            mean_mcc,
            std_mcc,
            best_sentence: population[best_index(&values)].tree.canonical(),
            foldset_id: folds.id,
            evals,
            cache_hits,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if gen == cfg.max_generations || start.elapsed() >= cfg.wall_clock_budget {
            let best = population[best_index(&values)].clone();
            return Ok(SearchResult { best, log, population, foldset: folds });
        }
        gen += 1;
        population = breed(&population, g, cfg, gen);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinalReport {
    pub sentence: String,
    pub cv_mean: f64,
    pub cv_std: f64,
    pub cv_status: EvalStatus,
    pub blind_mcc: f64,
    pub blind_size: usize,
    /// Outcome of the refit; anything but ok scores the blind set 0.0.
    pub blind_status: EvalStatus,
    pub pipeline: Option<FittedPipeline>,
}

impl FinalReport {
    /// Two-column summary mirroring the CV / blind-test table layout.
    pub fn to_markdown(&self, dataset: &str) -> String {
        let mut s = String::from("# Final report\n\n");
        writeln!(s, "Pipeline: `{}`\n", self.sentence).unwrap();
        s.push_str("| Dataset | 5-fold CV | Blind Test |\n|---|---|---|\n");
        writeln!(s, "| {dataset} | {} | {:.3} |", mean_std(self.cv_mean, self.cv_std), self.blind_mcc).unwrap();
        writeln!(
            s,
            "\nCV status: {}. Blind status: {}. Blind set size: {}.",
            self.cv_status, self.blind_status, self.blind_size
        )
        .unwrap();
        s
    }
}

/// `mean (std)` with three decimals.
pub fn mean_std(mean: f64, std: f64) -> String {
    format!("{mean:.3} ({std:.3})")
}

pub fn population_std(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Refits the chosen pipeline on the whole training split and scores it on
/// the blind molecules. A refit or prediction failure is reported in
/// `blind_status` with a blind score of 0.0, like a failed evaluation.
pub fn finalize(
    best: &Individual,
    train: &TrainData,
    blind: &[MoleculeGraph],
    blind_y: &[u8],
    max_distance: usize,
    master_seed: u64,
) -> Result<FinalReport, SearchError> {
    let spec = PipelineSpec::from_tree(&best.tree).map_err(|e| SearchError::Pipeline(PipelineError::Spec(e)))?;
    let x = train.features(spec.groups);
    let seed = derive_seed(master_seed, "final", 0, 0);
    let xb = crate::chem::featurize::featurize_molecules(blind, spec.groups, max_distance);
    let scored = FittedPipeline::fit(&spec, &x, &train.y, seed, Deadline::none())
        .and_then(|p| p.predict(&xb).map(|pred| (p, pred)));
    let (pipeline, blind_mcc, blind_status) = match scored {
        Ok((p, pred)) => (Some(p), mcc(&confusion(blind_y, &pred).map_err(SearchError::Data)?), EvalStatus::Ok),
        Err(e) => (None, 0.0, status_of(&e)),
    };
    let rec = best.fitness.clone().unwrap_or_else(|| FitnessRecord::failure(EvalStatus::TrainFailure));
    Ok(FinalReport {
        sentence: spec.sentence(),
        cv_mean: rec.mean_mcc,
        cv_std: population_std(&rec.per_fold_mcc),
        cv_status: rec.status,
        blind_mcc,
        blind_size: blind_y.len(),
        blind_status,
        pipeline,
    })
}

/// Per-component counts over a set of pipelines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelectionCounts {
    pub features: BTreeMap<String, usize>,
    pub scalers: BTreeMap<String, usize>,
    pub selectors: BTreeMap<String, usize>,
    pub classifiers: BTreeMap<String, usize>,
    pub total: usize,
}

pub fn scaler_name(s: Option<ScalerSpec>) -> &'static str {
    match s {
        None => "none",
        Some(ScalerSpec::Normalizer(_)) => "Normalizer",
        Some(ScalerSpec::MinMax) => "MinMaxScaler",
        Some(ScalerSpec::MaxAbs) => "MaxAbsScaler",
        Some(ScalerSpec::Robust { .. }) => "RobustScaler",
        Some(ScalerSpec::Standard { .. }) => "StddScaler",
    }
}

pub fn selector_name(s: Option<SelectorSpec>) -> &'static str {
    match s {
        None => "none",
        Some(SelectorSpec::VarianceThreshold { .. }) => "VarianceThreshold",
        Some(SelectorSpec::Percentile { .. }) => "SelectPercentile",
        Some(SelectorSpec::Fpr { .. }) => "SelectFPR",
        Some(SelectorSpec::Fwe { .. }) => "SelectFWE",
        Some(SelectorSpec::Fdr { .. }) => "SelectFDR",
    }
}

impl SelectionCounts {
    pub fn add(&mut self, spec: &PipelineSpec) {
        *self.features.entry(spec.groups.to_string()).or_default() += 1;
        *self.scalers.entry(scaler_name(spec.scaler).to_string()).or_default() += 1;
        *self.selectors.entry(selector_name(spec.selector).to_string()).or_default() += 1;
        *self.classifiers.entry(spec.classifier.name().to_string()).or_default() += 1;
        self.total += 1;
    }

    pub fn from_specs<'a>(specs: impl IntoIterator<Item = &'a PipelineSpec>) -> SelectionCounts {
        let mut c = SelectionCounts::default();
        specs.into_iter().for_each(|s| c.add(s));
        c
    }

    pub fn tables(&self) -> [(&'static str, &BTreeMap<String, usize>); 4] {
        [
            ("features", &self.features),
            ("scaler", &self.scalers),
            ("selector", &self.selectors),
            ("classifier", &self.classifiers),
        ]
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("# Selection frequencies\n\nPipelines: {}\n", self.total);
        for (name, table) in self.tables() {
            write!(s, "\n## {name}\n\n| Component | Count | Frequency |\n|---|---|---|\n").unwrap();
            let mut rows: Vec<_> = table.iter().collect();
            rows.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
            for (k, v) in rows {
                writeln!(s, "| {k} | {v} | {:.3} |", *v as f64 / self.total as f64).unwrap();
            }
        }
        s
    }
}
