use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gbspam_core::resampling::ResampleMethod;

#[derive(Debug, Parser)]
#[command(name = "gbspam", version, about = "Gradient-boosted tree spam detection")]
pub struct Cli {
    /// Worker threads for training and search (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split, train and write the model, manifest and training log.
    Train(TrainArgs),
    /// Score a saved model and write metrics and curve files.
    Evaluate(EvaluateArgs),
    /// Search a hyperparameter grid on the training partition, then refit.
    GridSearch(GridSearchArgs),
    /// Multi-seed run with summary tables and a resampling study.
    Reproduce(ReproduceArgs),
    /// Rebalance a dataset file and write the result as CSV.
    Resample(ResampleCmdArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Headerless CSV: feature columns followed by a 0/1 label.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.3)]
    pub test_fraction: f64,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// TOML file of hyperparameter fields overriding the defaults.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub colsample: Option<f64>,
    #[arg(long)]
    pub subsample: Option<f64>,
    #[arg(long)]
    pub min_child_weight: Option<f64>,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Patience in rounds; 0 disables early stopping.
    #[arg(long)]
    pub early_stopping: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum ResampleChoice {
    #[default]
    None,
    Over,
    Under,
    Smote,
    Tomek,
    SmoteTomek,
}

impl ResampleChoice {
    pub fn method(self) -> Option<ResampleMethod> {
        match self {
            ResampleChoice::None => None,
            ResampleChoice::Over => Some(ResampleMethod::RandomOver),
            ResampleChoice::Under => Some(ResampleMethod::RandomUnder),
            ResampleChoice::Smote => Some(ResampleMethod::Smote),
            ResampleChoice::Tomek => Some(ResampleMethod::Tomek),
            ResampleChoice::SmoteTomek => Some(ResampleMethod::SmoteTomek),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ResampleArgs {
    /// Rebalance the training partition before fitting.
    #[arg(long, value_enum, default_value_t = ResampleChoice::None)]
    pub resample: ResampleChoice,
    #[arg(long, default_value_t = 5)]
    pub k_neighbors: usize,
}

impl Default for ResampleArgs {
    fn default() -> Self {
        Self {
            resample: ResampleChoice::None,
            k_neighbors: 5,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub resample: ResampleArgs,
    #[arg(long, default_value = "runs/train")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Partition {
    Train,
    Test,
    All,
}

impl Partition {
    pub fn name(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Test => "test",
            Partition::All => "all",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Manifest written by `train`; its split is replayed.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Dataset file; defaults to the manifest's dataset.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Rows to score. Without a manifest only `all` is available.
    #[arg(long, value_enum)]
    pub split: Option<Partition>,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value = "runs/evaluate")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Validation {
    Holdout,
    Kfold,
}

#[derive(Debug, Clone, Args)]
pub struct GridSearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Base configuration the grid is applied on top of.
    #[command(flatten)]
    pub params: ParamArgs,
    /// TOML grid (keys are hyperparameter names, values are lists).
    /// Defaults to the shipped grid.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Validation::Holdout)]
    pub validation: Validation,
    #[arg(long, default_value_t = 0.2)]
    pub holdout_fraction: f64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value = "runs/grid-search")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 0.3)]
    pub test_fraction: f64,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 5)]
    pub k_neighbors: usize,
    /// Skip the resampling study.
    #[arg(long)]
    pub skip_resampling: bool,
    #[arg(long, default_value = "runs/reproduce")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ResampleCmdArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = parse_method)]
    pub resample: ResampleMethod,
    #[arg(long, default_value_t = 5)]
    pub k_neighbors: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_method(s: &str) -> Result<ResampleMethod, String> {
    s.parse::<ResampleMethod>()
        .map_err(|_| format!("expected one of over, under, smote, tomek, smote-tomek; got {s:?}"))
}
