use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

#[derive(Parser)]
#[command(name = "ideation", version, about = "Train and inspect a CNN-BiGRU-attention text classifier")]
struct Cli {
    /// Run every stage on a single thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean, split and encode a labelled CSV.
    Prepare(PrepareArgs),
    /// Train a model on a prepared dataset.
    Train(TrainArgs),
    /// Score a split and write metrics, ROC and confusion files.
    Evaluate(EvaluateArgs),
    /// Print the probability for one text.
    Predict(PredictArgs),
    /// Shapley token attributions and attention weights.
    Explain(ExplainArgs),
    /// Finite-difference check of every layer's backward pass.
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
pub struct PrepareArgs {
    /// CSV with `text` and `class` columns.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Train,validation,test fractions, e.g. `0.8,0.1,0.1`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub ratios: Option<Vec<f64>>,
    #[arg(long)]
    pub vocab_size: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Directory written by `prepare`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// Grid-search GRU width and dropout before the final run.
    #[arg(long)]
    pub search: bool,
    /// Epoch budget per grid point.
    #[arg(long, default_value_t = 5)]
    pub search_epochs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PresetArg {
    PaperIii,
    PaperIv,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Train,
    Validation,
    Test,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Directory written by `prepare`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub text: String,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["row", "text", "text_file"]))]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Row of the prepared split to explain (needs `--data`).
    #[arg(long, requires = "data")]
    pub row: Option<usize>,
    #[arg(long)]
    pub text: Option<String>,
    /// One input text per line.
    #[arg(long)]
    pub text_file: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct GradcheckArgs {
    /// Number of random toy configurations.
    #[arg(long, default_value_t = 20)]
    pub configs: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let par = if cli.sequential {
        ideation_core::Parallelism::Sequential
    } else {
        ideation_core::Parallelism::Threads
    };
    let result = match cli.command {
        Command::Prepare(a) => commands::prepare(a),
        Command::Train(a) => commands::train(a, cli.sequential),
        Command::Evaluate(a) => commands::evaluate(a, par),
        Command::Predict(a) => commands::predict(a),
        Command::Explain(a) => commands::explain(a, par),
        Command::Gradcheck(a) => commands::gradcheck(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
