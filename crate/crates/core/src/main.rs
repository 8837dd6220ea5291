use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lexfactor::pipeline::{run_pipeline, run_stage, verify, ConfigLayer, PipelineConfig, Stage};
use lexfactor::{Error, Result};

#[derive(Parser)]
#[command(name = "lexfactor", version, about = "Lexical factor analysis of review corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage in order.
    Pipeline(Flags),
    /// Normalize the review file into reviews.jsonl.
    Ingest(Flags),
    /// Build the noun/adjective term dictionary.
    Dict(Flags),
    /// Build the document-term matrix and apply the variance filter.
    Matrix(Flags),
    /// Extract, rotate, prune and refine factors.
    Efa(Flags),
    /// Write factor reports.
    Report(Flags),
    /// Check manifest counts against the artifacts on disk.
    Verify(Flags),
}

#[derive(Args)]
struct Flags {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Review file (.jsonl or .csv).
    #[arg(long)]
    reviews: Option<PathBuf>,
    /// Lexical database directory (WordNet file layout).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Stopword file, one word per line; defaults to the bundled English list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// JSON object mapping factor numbers to theme labels.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, conflicts_with = "top_k_variance")]
    min_variance: Option<f64>,
    #[arg(long)]
    top_k_variance: Option<usize>,
    /// `kaiser` or `fixed:<k>`.
    #[arg(long)]
    factors: Option<String>,
    /// Minimum absolute loading kept per factor.
    #[arg(long)]
    threshold: Option<f64>,
    /// Number of factors kept after refinement.
    #[arg(long)]
    retain: Option<usize>,
    #[arg(long)]
    uls_tol: Option<f64>,
    #[arg(long)]
    uls_max_iter: Option<usize>,
    /// Rotate without Kaiser row normalization.
    #[arg(long)]
    no_kaiser_normalize: bool,
    #[arg(long)]
    varimax_tol: Option<f64>,
    #[arg(long)]
    varimax_max_iter: Option<usize>,
    /// Exemplar reviews listed per factor.
    #[arg(long)]
    exemplars: Option<usize>,
    /// Also write the correlation matrix (Matrix Market array format).
    #[arg(long)]
    dump_correlation: bool,
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Flags {
    fn resolve(self) -> Result<PipelineConfig> {
        let base = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        let flags = ConfigLayer {
            reviews: self.reviews,
            lexicon: self.lexicon,
            stopwords: self.stopwords,
            labels: self.labels,
            min_variance: self.min_variance,
            top_k_variance: self.top_k_variance,
            factors: self.factors,
            threshold: self.threshold,
            retain: self.retain,
            uls_tol: self.uls_tol,
            uls_max_iter: self.uls_max_iter,
            kaiser_normalize: self.no_kaiser_normalize.then_some(false),
            varimax_tol: self.varimax_tol,
            varimax_max_iter: self.varimax_max_iter,
            exemplars: self.exemplars,
            dump_correlation: self.dump_correlation.then_some(true),
            output_dir: self.output_dir,
            threads: self.threads,
        };
        PipelineConfig::resolve(base.overlay(flags))
    }
}

fn run(command: Command) -> Result<()> {
    let (stage, flags) = match command {
        Command::Pipeline(f) => return run_pipeline(&f.resolve()?),
        Command::Verify(f) => {
            let cfg = f.resolve()?;
            let mismatches = verify(&cfg.output_dir)?;
            if mismatches.is_empty() {
                println!("manifest counts match artifacts in {}", cfg.output_dir.display());
                return Ok(());
            }
            for m in &mismatches {
                eprintln!("{}: manifest {} != artifact {}", m.key, m.manifest, m.actual);
            }
            return Err(Error::Validation(format!("{} manifest count(s) disagree", mismatches.len())));
        }
        Command::Ingest(f) => (Stage::Ingest, f),
        Command::Dict(f) => (Stage::Dict, f),
        Command::Matrix(f) => (Stage::Matrix, f),
        Command::Efa(f) => (Stage::Efa, f),
        Command::Report(f) => (Stage::Report, f),
    };
    run_stage(stage, &flags.resolve()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lexfactor: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
