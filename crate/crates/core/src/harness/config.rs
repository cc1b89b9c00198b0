//! Flat `key = value` run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use crate::chem::descriptors::DEFAULT_MAX_DISTANCE;
use crate::search::SearchConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub search: SearchConfig,
    pub grammar: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub train_fraction: f64,
    pub max_distance: usize,
}

impl RunConfig {
    pub fn new(desk: bool) -> RunConfig {
        RunConfig {
            search: if desk { SearchConfig::desk() } else { SearchConfig::default() },
            grammar: None,
            dataset: None,
            train_fraction: 0.9,
            max_distance: DEFAULT_MAX_DISTANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

pub const CONFIG_KEYS: [&str; 17] = [
    "population_size",
    "max_generations",
    "wall_clock_budget",
    "crossover_probability",
    "mutation_probability",
    "elitism_size",
    "resample_period",
    "individual_budget",
    "tournament_size",
    "k_folds",
    "master_seed",
    "depth_limit",
    "jobs",
    "grammar",
    "dataset",
    "train_fraction",
    "max_distance",
];

fn value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError { line, message: format!("bad value '{v}' for {key}") })
}

fn seconds(line: usize, key: &str, v: &str) -> Result<Duration, ConfigError> {
    let s: f64 = value(line, key, v)?;
    Duration::try_from_secs_f64(s).map_err(|_| ConfigError { line, message: format!("bad duration '{v}' for {key}") })
}

/// Applies `key = value` lines on top of `base`. Blank lines and `#`
/// comments are skipped; unknown keys are errors. Durations are seconds.
pub fn parse_config(text: &str, base: RunConfig) -> Result<RunConfig, ConfigError> {
    let mut c = base;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let (key, v) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| ConfigError { line, message: format!("expected 'key = value', found '{content}'") })?;
        let s = &mut c.search;
        match key {
            "population_size" => s.population_size = value(line, key, v)?,
            "max_generations" => s.max_generations = value(line, key, v)?,
            "wall_clock_budget" => s.wall_clock_budget = seconds(line, key, v)?,
            "crossover_probability" => s.crossover_probability = value(line, key, v)?,
            "mutation_probability" => s.mutation_probability = value(line, key, v)?,
            "elitism_size" => s.elitism_size = value(line, key, v)?,
            "resample_period" => s.resample_period = value(line, key, v)?,
            "individual_budget" => s.individual_budget = seconds(line, key, v)?,
            "tournament_size" => s.tournament_size = value(line, key, v)?,
            "k_folds" => s.k_folds = value(line, key, v)?,
            "master_seed" => s.master_seed = value(line, key, v)?,
            "depth_limit" => s.depth_limit = value(line, key, v)?,
            "jobs" => s.jobs = Some(value(line, key, v)?),
            "grammar" => c.grammar = Some(PathBuf::from(v)),
            "dataset" => c.dataset = Some(PathBuf::from(v)),
            "train_fraction" => c.train_fraction = value(line, key, v)?,
            "max_distance" => c.max_distance = value(line, key, v)?,
            _ => return Err(ConfigError { line, message: format!("unknown key '{key}'") }),
        }
    }
    Ok(c)
}

/// Canonical text form; parsing it back over defaults reproduces `c`.
pub fn render_config(c: &RunConfig) -> String {
    let s = &c.search;
    let mut out = format!(
        "population_size = {}\nmax_generations = {}\nwall_clock_budget = {}\ncrossover_probability = {}\n\
         mutation_probability = {}\nelitism_size = {}\nresample_period = {}\nindividual_budget = {}\n\
         tournament_size = {}\nk_folds = {}\nmaster_seed = {}\ndepth_limit = {}\n",
        s.population_size,
        s.max_generations,
        s.wall_clock_budget.as_secs_f64(),
        s.crossover_probability,
        s.mutation_probability,
        s.elitism_size,
        s.resample_period,
        s.individual_budget.as_secs_f64(),
        s.tournament_size,
        s.k_folds,
        s.master_seed,
        s.depth_limit,
    );
    if let Some(j) = s.jobs {
        out.push_str(&format!("jobs = {j}\n"));
    }
    if let Some(g) = &c.grammar {
        out.push_str(&format!("grammar = {}\n", g.display()));
    }
    if let Some(d) = &c.dataset {
        out.push_str(&format!("dataset = {}\n", d.display()));
    }
    out.push_str(&format!("train_fraction = {}\nmax_distance = {}\n", c.train_fraction, c.max_distance));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_comments() {
        let c = parse_config("# run\npopulation_size = 8\n\nindividual_budget = 2.5 # s\n", RunConfig::new(false)).unwrap();
        assert_eq!(c.search.population_size, 8);
        assert_eq!(c.search.individual_budget, Duration::from_millis(2500));
        assert_eq!(c.search.max_generations, 50);
    }

    #[test]
    fn unknown_key_names_line() {
        let e = parse_config("population_size = 8\npopulaton_size = 9\n", RunConfig::new(false)).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("populaton_size"));
        assert!(parse_config("k_folds = five\n", RunConfig::new(false)).is_err());
        assert!(parse_config("k_folds\n", RunConfig::new(false)).is_err());
    }

    #[test]
    fn desk_profile() {
        let c = RunConfig::new(true);
        assert_eq!((c.search.population_size, c.search.max_generations), (20, 10));
        assert_eq!(c.search.individual_budget, Duration::from_secs(30));
    }

    #[test]
    fn render_round_trips() {
        let mut c = RunConfig::new(true);
        c.search.jobs = Some(3);
        c.grammar = Some("g.bnf".into());
        assert_eq!(parse_config(&render_config(&c), RunConfig::new(false)).unwrap(), c);
        for key in CONFIG_KEYS {
            if let Err(e) = parse_config(&format!("{key} = x"), RunConfig::new(false)) {
                assert!(!e.message.contains("unknown"), "{key}");
            }
        }
    }
}
