//! Command-line pipeline: fit, decode, evaluate, compare, sweep K, summarize, generate data.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

mod commands;
mod corpus;
mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::summarize::{summary_block, RegimeSummary};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "regime-seg", version, about = "Persistent emotional-regime segmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model per conversation and write the model and decoded labels.
    Fit(FitArgs),
    /// Compute metrics for decoded labels, with corpus means.
    Eval(EvalArgs),
    /// Paired comparison of two decoded label sets over one corpus.
    Compare(CompareArgs),
    /// Gaussian-HMM diagnostics over a range of K.
    SweepK(SweepArgs),
    /// Print the regime summary block at one turn.
    Summarize(SummarizeArgs),
    /// Generate a synthetic corpus with ground-truth labels.
    GenSynth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Hmm,
    Sticky,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scope {
    PerConversation,
    Corpus,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Random seed.
    #[arg(long, env = "REGIME_SEG_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Series file (.csv or .json) or corpus manifest (.json object).
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Number of states for the Gaussian HMM.
    #[arg(long, required_if_eq("model", "hmm"))]
    pub k: Option<usize>,
    /// Truncation level for the sticky HDP-HMM.
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = 500)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    /// Store retained posterior samples in the model file.
    #[arg(long)]
    pub include_samples: bool,
    /// Override the manifest's standardization scope.
    #[arg(long, value_enum)]
    pub scope: Option<Scope>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub input: PathBuf,
    /// Directory holding `<id>.labels.csv` decodes.
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference labels for a single-series input; manifests carry their own.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scope: Option<Scope>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub input: PathBuf,
    /// First decode directory.
    #[arg(long)]
    pub a: PathBuf,
    /// Second decode directory.
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scope: Option<Scope>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    #[arg(long, default_value_t = 12)]
    pub k_max: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, value_enum)]
    pub scope: Option<Scope>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    pub input: PathBuf,
    /// Fitted model or posterior file.
    #[arg(long)]
    pub model: PathBuf,
    /// Decoded labels; decoded from the model when omitted.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Conversation id when the input is a manifest.
    #[arg(long)]
    pub id: Option<String>,
    /// Query turn; defaults to T / 2.
    #[arg(long)]
    pub query: Option<usize>,
    #[arg(long, value_enum)]
    pub scope: Option<Scope>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of regimes.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Utterances per conversation.
    #[arg(long, default_value_t = 120)]
    pub t: usize,
    #[arg(long, default_value_t = 0.95)]
    pub self_transition: f64,
    /// Distance between adjacent regime means, in noise standard deviations.
    #[arg(long, default_value_t = 3.0)]
    pub separation: f64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    /// Comma-separated modality tags.
    #[arg(long, value_delimiter = ',', default_value = "txt,aud")]
    pub modalities: Vec<String>,
    /// Per-channel probability of emitting from another regime.
    #[arg(long, default_value_t = 0.0)]
    pub decoupling: f64,
    #[arg(long, default_value_t = 1)]
    pub conversations: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Runs one command, writing machine-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(a) => commands::fit::run(&a, out),
        Command::Eval(a) => commands::eval::run(&a, out),
        Command::Compare(a) => commands::compare::run(&a, out),
        Command::SweepK(a) => commands::sweep::run(&a, out),
        Command::Summarize(a) => commands::summarize::run(&a, out),
        Command::GenSynth(a) => commands::synth::run(&a, out),
    }
}

/// Parses `args`, runs, reports errors on standard error and returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
