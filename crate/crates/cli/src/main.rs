//! `regretstream`: one subcommand per pipeline stage, composed through files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Threads requested through the environment win over `--threads`.
const THREADS_ENV: &str = "REGRETSTREAM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "regretstream", version, about = "Deleted-tweet analytics and deletion prediction")]
struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Optional text resources; the shipped fixtures are used for any that are omitted.
#[derive(Debug, Clone, Args)]
struct ResourceArgs {
    /// Category lexicon (JSON).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Word valence table (JSON).
    #[arg(long)]
    valence: Option<PathBuf>,
    /// Dictionary word list, one word per line.
    #[arg(long)]
    wordlist: Option<PathBuf>,
    /// Pre-computed part-of-speech tags (JSONL).
    #[arg(long)]
    tags: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Join a tweet/deletion event stream into a labeled corpus.
    Ingest {
        #[arg(long)]
        events: PathBuf,
        /// Posting window start, posting window end, deletion window end (RFC 3339).
        #[arg(long, num_args = 3, value_names = ["START", "END", "DELETE_END"])]
        window: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Keep the first copy of repeated tweet ids instead of failing.
        #[arg(long)]
        skip_duplicates: bool,
    },
    /// Remove non-English, automated, retweeted and superficially deleted tweets.
    Clean {
        #[arg(long)]
        corpus: PathBuf,
        /// Client whitelist, one client name per line.
        #[arg(long)]
        whitelist: Option<PathBuf>,
        /// Cleanup settings (JSON); omitted fields keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Filter report (JSON); a text table is also printed.
        #[arg(long)]
        report: PathBuf,
    },
    /// Write the open-text and dense feature matrix of a corpus.
    Featurize {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        valence: PathBuf,
        #[arg(long)]
        wordlist: PathBuf,
        #[arg(long)]
        tags: Option<PathBuf>,
        /// Append the response block built from replies, retweets and quotes.
        #[arg(long)]
        with_responses: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare deleted with non-deleted tweets and deleters with non-deleters.
    Analyze {
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated subset of ntd,nud,users,temporal,response,traits.
        #[arg(long, value_delimiter = ',', default_value = "ntd,nud,users,temporal,response,traits")]
        metrics: Vec<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Feature-to-trait mapping (JSON); defaults to the shipped table.
        #[arg(long)]
        traits: Option<PathBuf>,
        #[command(flatten)]
        resources: ResourceArgs,
        /// Output directory for the JSON and CSV reports.
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate crowd annotations by majority vote.
    AnnotateAgg {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the two-stage deletion classifier.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// Training settings (JSON); omitted fields keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Model bundle to write.
        #[arg(long)]
        out: PathBuf,
        /// Metrics report (JSON); defaults to `<out>.metrics.json`.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Train on replied tweets with response features added.
        #[arg(long)]
        with_responses: bool,
        #[command(flatten)]
        resources: ResourceArgs,
    },
    /// Score the tweets of an event stream with a trained bundle.
    Predict {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        events: PathBuf,
        /// Predictions (CSV).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        resources: ResourceArgs,
    },
    /// Retrain with each feature group removed in turn.
    Ablate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated groups: lexicon,sentiment,pos,tweet,user,derived_open_text.
        #[arg(long, value_delimiter = ',', default_value = "lexicon,sentiment,pos,tweet,user,derived_open_text")]
        groups: Vec<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Ablation report (JSON); a CSV with the same stem is written beside it.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        resources: ResourceArgs,
    },
    /// Generate a seeded synthetic event stream and its ground-truth ledger.
    Synth {
        /// Generator settings (JSON); omitted fields keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_events: PathBuf,
        #[arg(long)]
        out_ledger: PathBuf,
    },
}

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<regretstream::Error> for CliError {
    fn from(e: regretstream::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => match flag {
            Some(0) => Err(CliError::Validation("--threads must be at least 1".into())),
            other => Ok(other),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = thread_count(cli.threads)
        .and_then(|threads| regretstream::exec::with_threads(threads, || commands::run(cli.command)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
