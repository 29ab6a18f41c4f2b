use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "stepsql", version, about = "Step-by-step text-to-SQL toolkit")]
pub struct Cli {
    /// TOML file with `[pipeline]`, `[augment]` and `bridge_url` settings;
    /// flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write subtask training records for a corpus.
    Build(BuildArgs),
    /// Expand a corpus with keyword replacement and paraphrases.
    Augment(AugmentArgs),
    /// Translate one question to SQL.
    Ask(AskArgs),
    /// Run a variant x dataset accuracy matrix.
    Eval(EvalArgs),
    /// Generate a synthetic corpus and its typo suite.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subtask {
    Table,
    Column,
    Sqlgen,
    Valuefill,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum)]
    pub subtask: Subtask,
    #[arg(long)]
    pub out: PathBuf,
    /// Keep each negative table record with this probability.
    #[arg(long)]
    pub keep_negatives: Option<f64>,
    /// Append column-perturbed variants (column and sqlgen subtasks).
    #[arg(long)]
    pub perturb_columns: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Target output size as a multiple of the input size.
    #[arg(long)]
    pub multiplier: Option<f64>,
    #[arg(long)]
    pub no_keywords: bool,
    #[arg(long)]
    pub no_paraphrase: bool,
    /// Write only the new pairs, without the originals.
    #[arg(long)]
    pub only_new: bool,
    /// Take paraphrases from the bridge service instead of the rule rewriter.
    #[arg(long)]
    pub bridge_url: Option<String>,
}

/// Pipeline settings shared by `ask` and `eval`.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineFlags {
    #[arg(long)]
    pub beam: Option<usize>,
    #[arg(long)]
    pub table_threshold: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub no_ner: bool,
    #[arg(long, value_name = "BOOL")]
    pub restore_mode: Option<bool>,
    /// `<stage>=<baseline|bridge>`; stage is table, column, sqlgen,
    /// valuefill or all. Repeatable.
    #[arg(long = "backend", value_name = "STAGE=BACKEND")]
    pub backends: Vec<String>,
    #[arg(long)]
    pub bridge_url: Option<String>,
}

#[derive(Debug, Args)]
pub struct AskArgs {
    #[arg(long)]
    pub schema: PathBuf,
    pub question: String,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    /// Also print the stage trace.
    #[arg(long, short)]
    pub verbose: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub schema: PathBuf,
    /// Dataset as `name=path` or `path` (named by file stem). Repeatable.
    #[arg(long = "corpus", required = true)]
    pub corpora: Vec<String>,
    /// TOML file of `[[variant]]` tables; defaults to one variant built from
    /// the flags.
    #[arg(long)]
    pub variants: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Evaluate only the held-out side of a split with this training ratio.
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Where the typo suite goes; defaults to `<out stem>.typo.jsonl`.
    #[arg(long)]
    pub typo_out: Option<PathBuf>,
}
