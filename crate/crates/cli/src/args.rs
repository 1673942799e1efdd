// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reckit::data::FileFormat;
use reckit::metrics::{Gain, MissingPolicy};
use reckit::RowSelector;

#[derive(Debug, Parser)]
#[command(name = "reckit", version, about = "Offline recommender experiments over rating files")]
pub struct Cli {
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a rating file into train/test folds.
    Split(SplitArgs),
    /// Fit an algorithm and save the model.
    Train(TrainArgs),
    /// Predict ratings for (user, item) pairs.
    Predict(PredictArgs),
    /// Produce top-N recommendation lists.
    Recommend(RecommendArgs),
    /// Compute metrics for recommendations and predictions.
    Eval(EvalArgs),
    /// Run a full experiment from a config file.
    Experiment(ExperimentArgs),
    /// Write a synthetic rating set.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Rating file.
    #[arg(long, value_name = "FILE")]
    pub ratings: PathBuf,

    /// `csv` (with header) or `ml100k` (tab-separated u.data).
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: FileFormat,
}

fn parse_format(s: &str) -> Result<FileFormat, String> {
    s.parse().map_err(|e: reckit::Error| e.to_string())
}

fn parse_selector(s: &str) -> Result<RowSelector, String> {
    s.parse().map_err(|e: reckit::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitMethod {
    PartUsers,
    SampleUsers,
    PartRows,
    SampleRows,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_enum, default_value = "part-users")]
    pub method: SplitMethod,

    /// Number of folds.
    #[arg(long, default_value_t = 5)]
    pub k: usize,

    /// Test rows per test user: n:N, frac:F, last-n:N or last-frac:F.
    #[arg(long, default_value = "n:5", value_parser = parse_selector)]
    pub select: RowSelector,

    /// Users (sample-users) or rows (sample-rows) per fold.
    #[arg(long)]
    pub size: Option<usize>,

    /// Shuffle seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output prefix; writes PREFIX.train-J.csv, PREFIX.test-J.csv and PREFIX.folds.json.
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Algorithm name, e.g. bias, item-item or biased-mf.
    #[arg(long)]
    pub algo: String,

    /// Hyperparameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,

    #[command(flatten)]
    pub input: InputArgs,

    /// Save the bare algorithm without the top-N adapter.
    #[arg(long)]
    pub no_adapt: bool,

    /// Model file to write.
    #[arg(long, value_name = "MODEL")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct WorkerArgs {
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "RECKIT_WORKERS", default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long, value_name = "MODEL")]
    pub model: PathBuf,

    /// CSV with user and item columns; a rating column is carried through.
    #[arg(long, value_name = "FILE")]
    pub pairs: PathBuf,

    /// Format of the pairs file.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: FileFormat,

    #[command(flatten)]
    pub workers: WorkerArgs,

    /// Prediction CSV to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    /// Model file written by `train`.
    #[arg(long, value_name = "MODEL")]
    pub model: PathBuf,

    /// CSV with a user column; each distinct user gets a list.
    #[arg(long, value_name = "FILE")]
    pub users: PathBuf,

    /// List length; all candidates when omitted.
    #[arg(long)]
    pub n: Option<usize>,

    /// CSV of (user, item) candidate rows restricting each user's list.
    #[arg(long, value_name = "FILE")]
    pub candidates: Option<PathBuf>,

    #[command(flatten)]
    pub workers: WorkerArgs,

    /// Recommendation CSV to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Recommendation lists (user, item, score, rank plus grouping columns).
    #[arg(long, value_name = "FILE")]
    pub recs: Option<PathBuf>,

    /// Predictions (user, item, prediction, rating).
    #[arg(long, value_name = "FILE")]
    pub preds: Option<PathBuf>,

    /// Test ratings; needed for list metrics.
    #[arg(long, value_name = "FILE")]
    pub truth: Option<PathBuf>,

    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub truth_format: FileFormat,

    /// Comma-separated metric names.
    #[arg(long, default_value = "ndcg,precision,recall,rmse", value_delimiter = ',')]
    pub metrics: Vec<String>,

    #[arg(long, value_enum, default_value = "rating")]
    pub gain: GainArg,

    /// Truth rows below this rating are not relevant.
    #[arg(long)]
    pub min_rating: Option<f64>,

    /// Leave out truth users that have no list.
    #[arg(long)]
    pub exclude_missing: bool,

    #[arg(long, value_enum, default_value = "error")]
    pub missing: MissingArg,

    /// Output prefix; writes PREFIX.users.csv, PREFIX.summary.csv and PREFIX.accuracy.csv.
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GainArg {
    Binary,
    Rating,
}

impl From<GainArg> for Gain {
    fn from(g: GainArg) -> Gain {
        match g {
            GainArg::Binary => Gain::Binary,
            GainArg::Rating => Gain::Rating,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MissingArg {
    Error,
    Ignore,
}

impl From<MissingArg> for MissingPolicy {
    fn from(m: MissingArg) -> MissingPolicy {
        match m {
            MissingArg::Error => MissingPolicy::Error,
            MissingArg::Ignore => MissingPolicy::Ignore,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML experiment config.
    pub config: PathBuf,

    /// Output directory; defaults to the config's `out` or `results`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads for batch runs; overrides the config.
    #[arg(long, env = "RECKIT_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of users; 943 gives the full MovieLens 100K shape.
    #[arg(long, default_value_t = 943)]
    pub users: usize,

    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output format: `ml100k` or `csv`.
    #[arg(long, default_value = "ml100k", value_parser = parse_format)]
    pub format: FileFormat,

    /// Rating file to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}
