//! Command implementations behind the `pk-automl` binary: ingestion,
//! configuration, run orchestration and report files.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod synth;

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use crate::chem::FeaturizeError;
use crate::fitness::FitnessError;
use crate::grammar::shipped::{shipped, GRAMMAR_ENV, SHIPPED_BNF};
use crate::grammar::{Grammar, GrammarError};
use crate::ml::pipeline::PipelineError;
use crate::ml::SpecError;
use crate::search::SearchError;
use crate::stats::StatsError;

pub use commands::*;
pub use config::{parse_config, render_config, ConfigError, RunConfig};
pub use dataset::{ingest_csv, ingest_reader, Dataset, IngestError, Record};
pub use synth::{synth_dataset, SynthError, SynthKind};

#[derive(Debug)]
pub enum HarnessError {
    Io { path: PathBuf, error: io::Error },
    Ingest { path: PathBuf, error: IngestError },
    Config(ConfigError),
    Grammar { source: String, error: GrammarError },
    InvalidGrammar(String),
    Sentence(GrammarError),
    Spec(SpecError),
    Fitness(FitnessError),
    Search(SearchError),
    Pipeline(PipelineError),
    Featurize(FeaturizeError),
    Stats(StatsError),
    Synth(SynthError),
    BlindLeak(String),
    Usage(String),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Io { path, error } => write!(f, "{}: {error}", path.display()),
            HarnessError::Ingest { path, error } => write!(f, "{}: {error}", path.display()),
            HarnessError::Config(e) => write!(f, "{e}"),
            HarnessError::Grammar { source, error } => write!(f, "grammar {source}: {error}"),
            HarnessError::InvalidGrammar(report) => write!(f, "grammar is not clean: {report}"),
            HarnessError::Sentence(e) => write!(f, "unparseable sentence: {e}"),
            HarnessError::Spec(e) => write!(f, "pipeline sentence: {e}"),
            HarnessError::Fitness(e) => write!(f, "{e}"),
            HarnessError::Search(e) => write!(f, "{e}"),
            HarnessError::Pipeline(e) => write!(f, "{e}"),
            HarnessError::Featurize(e) => write!(f, "{e}"),
            HarnessError::Stats(e) => write!(f, "{e}"),
            HarnessError::Synth(e) => write!(f, "{e}"),
            HarnessError::BlindLeak(msg) => write!(f, "blind-set isolation violated: {msg}"),
            HarnessError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for HarnessError {}

pub(crate) fn read_text(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|error| HarnessError::Io { path: path.to_path_buf(), error })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|error| HarnessError::Io { path: path.to_path_buf(), error })
}

/// Grammar and its source text: the explicit path, else the file named by
/// the grammar environment variable, else the bundled grammar.
pub fn load_grammar(path: Option<&Path>) -> Result<(Grammar, String), HarnessError> {
    let env = std::env::var_os(GRAMMAR_ENV).map(PathBuf::from);
    match path.map(Path::to_path_buf).or(env) {
        Some(p) => {
            let text = read_text(&p)?;
            let g = Grammar::parse_bnf(&text)
                .map_err(|error| HarnessError::Grammar { source: p.display().to_string(), error })?;
            Ok((g, text))
        }
        None => Ok((shipped().clone(), SHIPPED_BNF.to_string())),
    }
}
