mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use eventea_core::strsim::SimilarityKind;

/// Event-centric entity alignment toolkit.
#[derive(Debug, Parser)]
#[command(name = "eventea", version, about)]
pub struct Cli {
    /// Global seed; overrides config seeds and the default fallback seed.
    #[arg(long, global = true, env = "EVENTEA_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dataset statistics and WL structural similarity
    Analyze(AnalyzeArgs),
    /// String-similarity name matching
    Baseline(BaselineArgs),
    /// Separate time expressions from names
    Split(SplitArgs),
    /// Embed the entities of one graph
    Encode(EncodeArgs),
    /// Train the time-aware encoder
    Train(TrainArgs),
    /// Evaluate two embedding tables on a split
    Eval(EvalArgs),
    /// Top-3 case-study report for chosen entities
    Cases(CasesArgs),
    /// Build a benchmark from raw graphs
    MakeDataset(MakeDatasetArgs),
}

#[derive(Debug, Args, Clone)]
pub struct DatasetArgs {
    /// Dataset directory
    #[arg(long)]
    pub dataset: PathBuf,
    /// Split folder relative to the dataset, e.g. `721_5fold/1`
    #[arg(long)]
    pub fold: Option<String>,
}

#[derive(Debug, Args, Clone)]
pub struct NameArgs {
    /// Name attributes in preference order (full IRI or local name)
    #[arg(long = "name-attr", value_delimiter = ',')]
    pub name_attr: Vec<String>,
    /// Compare names case-sensitively
    #[arg(long)]
    pub no_lowercase: bool,
}

#[derive(Debug, Args, Clone)]
pub struct ProviderArgs {
    /// Static token-vector store
    #[arg(long)]
    pub static_store: Option<PathBuf>,
    /// Contextual token-vector store
    #[arg(long)]
    pub contextual_store: Option<PathBuf>,
    /// Seed of the hash fallback vectors
    #[arg(long)]
    pub fallback_seed: Option<u64>,
    /// Vector dimension when no store is given
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Candidates {
    Test,
    All,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long, default_value_t = eventea_core::graph_iso::DEFAULT_WL_ITERATIONS)]
    pub wl_iterations: usize,
    /// Also write the report as JSON
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[command(flatten)]
    pub names: NameArgs,
    #[arg(long, value_parser = parse_kind)]
    pub kind: SimilarityKind,
    #[arg(long, default_value_t = 10)]
    pub topk: usize,
    #[arg(long, value_enum, default_value_t = Candidates::Test)]
    pub candidates: Candidates,
    /// Ranked candidates TSV
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Metrics JSON lines
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<SimilarityKind, String> {
    s.parse().map_err(|_| {
        let all: Vec<&str> = SimilarityKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("expected one of {}", all.join(", "))
    })
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Split a single name and print both parts
    #[arg(long, conflicts_with = "dataset")]
    pub name: Option<String>,
    /// Emit every string the encoder will look up, one per line
    #[arg(long, requires = "out")]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub names: NameArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EncodeMode {
    Tae,
    NameVector,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[command(flatten)]
    pub names: NameArgs,
    /// Which graph to embed
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub kg: u8,
    #[arg(long, value_enum, default_value_t = EncodeMode::Tae)]
    pub mode: EncodeMode,
    /// Trained parameters (tae mode)
    #[arg(long, required_if_eq("mode", "tae"))]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub no_time_attention: bool,
    #[arg(long)]
    pub no_other_attributes: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[command(flatten)]
    pub names: NameArgs,
    /// key = value training configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Search the margin x beta grid and keep the best run
    #[arg(long)]
    pub grid: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub embeddings_src: PathBuf,
    #[arg(long)]
    pub embeddings_tgt: PathBuf,
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Entity type file; defaults to the dataset's `entity_types` if present
    #[arg(long)]
    pub types: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub topk: usize,
    #[arg(long, value_enum, default_value_t = Candidates::Test)]
    pub candidates: Candidates,
    /// Metrics JSON lines
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CasesArgs {
    /// Source entity identifiers, one per line
    #[arg(long)]
    pub entities: PathBuf,
    #[arg(long)]
    pub embeddings_src: PathBuf,
    #[arg(long)]
    pub embeddings_tgt: PathBuf,
    #[command(flatten)]
    pub data: DatasetArgs,
    #[command(flatten)]
    pub names: NameArgs,
    #[arg(long, value_enum, default_value_t = Candidates::Test)]
    pub candidates: Candidates,
    /// TSV report; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MakeDatasetArgs {
    /// Raw graphs and links (dataset layout without split folders)
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub names: NameArgs,
    /// Keep links whose name similarity is at most this
    #[arg(long, default_value_t = eventea_core::dataset::DEFAULT_DIFFICULTY_THRESHOLD)]
    pub threshold: f64,
    /// Shared triples in graph-1 identifiers, line-aligned with the second file
    #[arg(long, requires = "shared_triples_2")]
    pub shared_triples_1: Option<PathBuf>,
    #[arg(long, requires = "shared_triples_1")]
    pub shared_triples_2: Option<PathBuf>,
    /// train,valid,test ratios
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.7])]
    pub ratios: Vec<f64>,
    #[arg(long, default_value = "split")]
    pub fold: String,
}

/// Failure classes mapped to process exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Diverged(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Diverged(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Data(e) | Failure::Diverged(e) => e,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
