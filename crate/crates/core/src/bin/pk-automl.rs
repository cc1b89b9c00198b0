use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use pk_automl::chem::descriptors::DEFAULT_MAX_DISTANCE;
use pk_automl::harness::{self, EvaluateOptions, HarnessError, SearchOptions, SynthKind};
use pk_automl::search::mean_std;

#[derive(Parser)]
#[command(name = "pk-automl", version, about = "Grammar-guided AutoML for small-molecule classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a pipeline on a dataset and write run artifacts.
    Search {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[arg(long, default_value = "run")]
        out: PathBuf,
        /// Small population, few generations, short per-pipeline budget.
        #[arg(long)]
        desk: bool,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cross-validate a pipeline sentence on a dataset.
    Evaluate {
        #[arg(long)]
        sentence: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Fold set number (the search reports which one scored its best).
        #[arg(long, default_value_t = 0)]
        foldset: u64,
        #[arg(long, default_value_t = 0.9)]
        train_fraction: f64,
        /// Also refit on the training split and score the blind split.
        #[arg(long)]
        blind: bool,
        /// Per-evaluation budget in seconds.
        #[arg(long, default_value_t = 300.0)]
        budget: f64,
    },
    /// Write the feature matrix of a dataset as CSV.
    Featurize {
        #[arg(long)]
        dataset: PathBuf,
        /// `all` or comma-separated group tokens.
        #[arg(long, default_value = "all")]
        groups: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_DISTANCE)]
        max_distance: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Generate a synthetic labelled molecule set.
    Synth {
        /// nitro-rule, mw-threshold or noisy-xor-groups
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Selection frequencies of pipeline components across run directories.
    Analyze {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank statistics over a dataset x method score table.
    Compare {
        scores: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a grammar file (default: environment variable, then bundled).
    ValidateGrammar { path: Option<PathBuf> },
}

fn run(cli: Cli) -> Result<String, HarnessError> {
    match cli.command {
        Command::Search { dataset, config, grammar, out, desk, jobs, seed } => {
            let o = harness::cmd_search(&SearchOptions { config, dataset, grammar, out: out.clone(), desk, jobs, seed })?;
            Ok(format!(
                "best: {}\n5-fold CV MCC: {}\nBlind Test MCC: {:.3}\nartifacts: {}\n",
                o.report.sentence,
                mean_std(o.report.cv_mean, o.report.cv_std),
                o.report.blind_mcc,
                out.display()
            ))
        }
        Command::Evaluate { sentence, dataset, grammar, seed, folds, foldset, train_fraction, blind, budget } => {
            let budget = Duration::try_from_secs_f64(budget).map_err(|e| HarnessError::Usage(format!("--budget: {e}")))?;
            let opts = EvaluateOptions {
                grammar,
                seed,
                k_folds: folds,
                foldset,
                train_fraction,
                blind,
                budget,
                ..EvaluateOptions::new(sentence, dataset)
            };
            Ok(harness::cmd_evaluate(&opts)?.render())
        }
        Command::Featurize { dataset, groups, out, max_distance, cache_dir } => {
            let groups = harness::parse_groups(&groups)?;
            harness::cmd_featurize(&dataset, groups, &out, max_distance, cache_dir.as_deref())
        }
        Command::Synth { kind, n, noise, seed, out } => {
            let kind: SynthKind = kind.parse().map_err(HarnessError::Synth)?;
            let digest = harness::cmd_synth(kind, n, noise, seed, &out)?;
            Ok(format!("{} sha256 {digest}\n", out.display()))
        }
        Command::Analyze { runs, out } => {
            let md = harness::cmd_analyze(&runs)?.to_markdown();
            if let Some(p) = out {
                std::fs::write(&p, &md).map_err(|error| HarnessError::Io { path: p, error })?;
            }
            Ok(md)
        }
        Command::Compare { scores, alpha, out } => harness::cmd_compare(&scores, alpha, out.as_deref()),
        Command::ValidateGrammar { path } => harness::cmd_validate_grammar(path.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
