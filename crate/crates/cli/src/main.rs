use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Knowledge-base completeness: oracles, rule mining, evaluation and
/// completeness-aware fact prediction.
#[derive(Debug, Parser)]
#[command(name = "kbc", version)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Swap subject and object of this relation when loading (repeatable).
    #[arg(long, global = true, value_name = "REL")]
    pub invert: Vec<String>,
    #[arg(long, global = true, default_value = "type", value_name = "REL")]
    pub type_relation: String,
    #[arg(long, global = true, default_value = "subclassOf", value_name = "REL")]
    pub subclass_relation: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an (ideal, observed) KB pair with exact completeness labels.
    GenSynth(GenSynthArgs),
    /// Mine completeness rules from a KB and training labels.
    Mine(MineArgs),
    /// Score the completeness oracles against gold labels.
    Eval(EvalArgs),
    /// Split labels, pick mining thresholds by cross-validation and report test scores.
    Grid(GridArgs),
    /// Mine ordinary Horn rules and predict missing facts.
    PredictFacts(PredictArgs),
    /// Mark predictions whose subject the model asserts complete.
    FilterFacts(FilterArgs),
    /// Precision by confidence bucket for a predictions file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct KbArgs {
    /// Facts TSV (`subject TAB relation TAB object`).
    #[arg(long)]
    pub kb: PathBuf,
    /// Older snapshot of the same KB, for the no-change oracle.
    #[arg(long)]
    pub old_kb: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GoldArgs {
    /// Labels TSV (`entity TAB relation TAB complete|incomplete`).
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Relations file (`relation TAB category [TAB domain]`); labels are
    /// derived from the categories when `--gold` is absent.
    #[arg(long)]
    pub relations: Option<PathBuf>,
    /// Restrict to these relations (repeatable).
    #[arg(long = "relation", value_name = "REL")]
    pub only: Vec<String>,
    /// Draw a sample of this size per relation from the labels.
    #[arg(long)]
    pub sample: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MiningArgs {
    /// TOML file with mining settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub support: Option<usize>,
    #[arg(long)]
    pub confidence: Option<f64>,
    #[arg(long)]
    pub max_body: Option<usize>,
    #[arg(long)]
    pub star_size: Option<usize>,
    #[arg(long)]
    pub popularity: Option<f64>,
    /// Comma-separated operator names.
    #[arg(long, value_delimiter = ',')]
    pub operators: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct GenSynthArgs {
    /// TOML data-set description.
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    pub spec: Option<PathBuf>,
    /// Built-in data set.
    #[arg(long)]
    pub scenario: Option<ScenarioName>,
    /// Entity count for `--scenario`.
    #[arg(long)]
    pub entities: Option<usize>,
    /// Output directory for ideal.tsv, observed.tsv and gold.tsv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScenarioName {
    PcaFunctional,
    LivingPeople,
    HasParent,
    Sparse,
    CoResidence,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[command(flatten)]
    pub kb: KbArgs,
    #[command(flatten)]
    pub gold: GoldArgs,
    #[command(flatten)]
    pub mining: MiningArgs,
    /// Rules file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Markdown,
    Tsv,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub kb: KbArgs,
    #[command(flatten)]
    pub gold: GoldArgs,
    /// Learned model for the Star, Class and AMIE columns.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// `all` or a comma-separated list of oracle columns.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    pub oracle: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    pub popularity: f64,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub kb: KbArgs,
    #[command(flatten)]
    pub gold: GoldArgs,
    #[command(flatten)]
    pub mining: MiningArgs,
    #[arg(long, default_value_t = 4)]
    pub folds: usize,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Candidate minimum supports.
    #[arg(long, value_delimiter = ',')]
    pub supports: Option<Vec<usize>>,
    /// Candidate minimum confidences.
    #[arg(long, value_delimiter = ',')]
    pub confidences: Option<Vec<f64>>,
    /// Directory for models, test labels and reports.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub kb: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub support: usize,
    #[arg(long, default_value_t = 0.1)]
    pub confidence: f64,
    #[arg(long, default_value_t = 2)]
    pub max_body: usize,
    /// Plain confidence instead of the PCA variant.
    #[arg(long)]
    pub cwa_confidence: bool,
    /// Also try atoms with constant objects.
    #[arg(long)]
    pub instantiate: bool,
    /// Where to write the mined fact rules.
    #[arg(long)]
    pub rules_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub kb: KbArgs,
    #[arg(long)]
    pub predictions: PathBuf,
    /// Completeness model (repeatable; rules are merged).
    #[arg(long, required = true)]
    pub model: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    /// Reference KB holding the true facts.
    #[arg(long)]
    pub ideal: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
