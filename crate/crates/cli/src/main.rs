mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cskit_core::ablation::{AblationMode, SizeUnit};
use cskit_core::synth::{CsType, MixPreset, PlanSide, SftTask};

use crate::config::{ClassifierKind, GeneratorKind, RunConfig};
use crate::report::{report_path, RunReport};

#[derive(Parser)]
#[command(name = "cskit", version, about = "Detect, count, ablate and synthesize code-switching in JSONL corpora")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Default)]
struct Common {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Language pair such as en-zh (primary first).
    #[arg(long, global = true)]
    pair: Option<String>,
    /// TOML script profile for pairs without a built-in one.
    #[arg(long, global = true)]
    script_profile: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Abort on the first malformed input line instead of skipping it.
    #[arg(long, global = true)]
    strict: bool,
    /// Run report path; defaults to <output>.report.json.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Find and classify code-switched segments.
    Detect(DetectArgs),
    /// Segment-class distribution of a detected corpus.
    Stats(StatsArgs),
    /// Build a cs-free or control corpus by substituting clean pool documents.
    Ablate(AblateArgs),
    /// Inject synthetic code-switching under a token budget.
    Synthesize(SynthArgs),
    /// Run a mix of synthesis allocations over both languages.
    Mix(MixArgs),
    /// Export instruction-tuning records for a code-switching generator.
    SftExport(SftArgs),
    /// Layer-wise cross-lingual alignment score (mutual-nn-cosine) of embedding pairs.
    Mexa(MexaArgs),
    /// Count tokens per language with the built-in counter.
    CountTokens(CountArgs),
}

#[derive(Args)]
pub struct DetectArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Bilingual lexicon (TSV) behind the sentence encoder.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Similarity threshold for sentence-level annotation.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Sentences searched on each side for a translation partner.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, value_enum)]
    pub token_classifier: Option<ClassifierKind>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StatsFormat {
    Json,
    Csv,
    Markdown,
}

#[derive(Args)]
pub struct StatsArgs {
    /// Detected corpus (output of detect).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Written to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: StatsFormat,
}

#[derive(Args)]
pub struct AblateArgs {
    #[arg(value_parser = parse_mode)]
    pub mode: AblationMode,
    /// Detected main corpus.
    #[arg(long)]
    pub main: PathBuf,
    /// Detected holdout pool.
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to <out>.manifest.jsonl.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_parser = parse_unit)]
    pub size_unit: Option<SizeUnit>,
}

fn parse_mode(s: &str) -> Result<AblationMode, String> {
    match s {
        "cs-free" => Ok(AblationMode::CsFree),
        "control" => Ok(AblationMode::Control),
        _ => Err(format!("expected cs-free or control, got {s:?}")),
    }
}

fn parse_unit(s: &str) -> Result<SizeUnit, String> {
    match s {
        "documents" | "docs" => Ok(SizeUnit::Documents),
        "tokens" => Ok(SizeUnit::Tokens),
        _ => Err(format!("expected documents or tokens, got {s:?}")),
    }
}

#[derive(Args, Clone, Default)]
pub struct BackendArgs {
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub backend: Option<GeneratorKind>,
    /// Lexicon terms rewritten per sentence by the dictionary generator.
    #[arg(long)]
    pub max_terms: Option<usize>,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "type")]
    pub cs_type: Option<CsType>,
    /// in-primary or in-secondary.
    #[arg(long)]
    pub side: Option<PlanSide>,
    /// New opposite-language tokens to add; unbounded when omitted.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub cap: Option<f64>,
    /// JSONL log of every committed rewrite.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Args)]
pub struct MixArgs {
    #[arg(long)]
    pub primary_in: PathBuf,
    #[arg(long)]
    pub secondary_in: PathBuf,
    #[arg(long)]
    pub primary_out: PathBuf,
    #[arg(long)]
    pub secondary_out: PathBuf,
    #[arg(long)]
    pub preset: Option<MixPreset>,
    /// Total token budget split by the preset.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub density: Option<f64>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Args)]
pub struct SftArgs {
    /// JSONL of {"source": ..., "target": ...} parallel sentences.
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Source language; defaults to the pair's primary.
    #[arg(long)]
    pub src_lang: Option<String>,
    #[arg(long)]
    pub tgt_lang: Option<String>,
    /// Repeat for several tasks; defaults to annotation and replacement.
    #[arg(long = "task")]
    pub tasks: Vec<SftTask>,
    /// Also export with source and target swapped.
    #[arg(long)]
    pub both_directions: bool,
    /// Pre-generated outputs, one JSON string per line, aligned with the pairs.
    /// Requires a single task and direction.
    #[arg(long)]
    pub generated: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Args)]
pub struct MexaArgs {
    /// E:F embedding file pair; repeat once per layer, in layer order.
    #[arg(long = "layers", required = true, value_delimiter = ',')]
    pub layers: Vec<String>,
    /// JSON result file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV result file (layer,score).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct CountArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// JSON totals; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Detect(_) => "detect",
            Command::Stats(_) => "stats",
            Command::Ablate(_) => "ablate",
            Command::Synthesize(_) => "synthesize",
            Command::Mix(_) => "mix",
            Command::SftExport(_) => "sft-export",
            Command::Mexa(_) => "mexa",
            Command::CountTokens(_) => "count-tokens",
        }
    }

    fn main_output(&self) -> Option<&std::path::Path> {
        match self {
            Command::Detect(a) => Some(&a.out),
            Command::Stats(a) => a.out.as_deref(),
            Command::Ablate(a) => Some(&a.out),
            Command::Synthesize(a) => Some(&a.out),
            Command::Mix(a) => Some(&a.primary_out),
            Command::SftExport(a) => Some(&a.out),
            Command::Mexa(a) => a.out.as_deref().or(a.csv.as_deref()),
            Command::CountTokens(a) => a.out.as_deref(),
        }
    }
}

fn resolve(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &common.pair {
        cfg.pair = Some(p.clone());
    }
    if let Some(p) = &common.script_profile {
        cfg.script_profile = Some(p.clone());
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.threads {
        cfg.threads = Some(t);
    }
    cfg.strict |= common.strict;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let name = cli.command.name();
    let report_file = report_path(cli.common.report.as_deref(), cli.command.main_output(), name);
    let mut report = RunReport::new(name, RunConfig::default());
    let result = resolve(&cli.common).and_then(|cfg| {
        report.config = cfg.clone();
        commands::run(cli.command, &mut report)
    });
    if let Err(e) = &result {
        eprintln!("error: {e:#}");
        report.fail(e);
    }
    if let Err(e) = report.write(&report_file) {
        eprintln!("error: could not write run report {}: {e:#}", report_file.display());
        return ExitCode::from(2);
    }
    ExitCode::from(report.status.exit_code())
}
