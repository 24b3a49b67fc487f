//! `sshmc`: train, apply, evaluate and benchmark hierarchical multi-label
//! classifiers with semi-supervised pseudo-labeling.

mod commands;
mod data;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sshmc::bundle::Method;

use settings::ModelFlags;

#[derive(Debug, Parser)]
#[command(name = "sshmc", version, about = "Semi-supervised hierarchical multi-label classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one method and write a model bundle.
    Train(TrainArgs),
    /// Apply a model bundle to a features CSV.
    Predict(PredictArgs),
    /// Score a model bundle on a labeled part.
    Evaluate(EvaluateArgs),
    /// Run the labeled-fraction protocol over one or more datasets.
    Benchmark(BenchmarkArgs),
    /// Friedman test and Nemenyi critical difference for a results table.
    Stats(StatsArgs),
    /// Write the artificial dataset.
    Synth(SynthArgs),
}

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    /// Dataset directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Labeled part; defaults to `labeled`, then `train`.
    #[arg(long)]
    pub labeled: Option<String>,
    /// Unlabeled part (features only); defaults to `unlabeled` when present.
    #[arg(long)]
    pub unlabeled: Option<String>,
    /// lcn, sshmc-v1, sshmc-v2, sshmc-v3, stml or sthc.
    #[arg(long)]
    pub method: Option<Method>,
    /// Bundle directory to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Z-score features with statistics from labeled and unlabeled rows.
    #[arg(long)]
    pub standardize: bool,
    #[command(flatten)]
    pub model: ModelFlags,
}

#[derive(Debug, clap::Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Features CSV with a header row.
    #[arg(long)]
    pub features: PathBuf,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Skip the hierarchical post-processing.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "test")]
    pub part: String,
    /// Metrics CSV; stdout only when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct BenchmarkArgs {
    /// Dataset directories with train (or labeled + unlabeled), valid and test parts.
    #[arg(long = "data", required = true)]
    pub data: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5, 0.7, 0.9])]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5, 0.7])]
    pub thr_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5])]
    pub k_grid: Vec<usize>,
    /// Methods to run; all six by default.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Drop label nodes with fewer positive training rows.
    #[arg(long)]
    pub min_node_count: Option<usize>,
    #[arg(long)]
    pub standardize: bool,
    #[command(flatten)]
    pub model: ModelFlags,
}

#[derive(Debug, clap::Args)]
pub struct StatsArgs {
    /// CSV with a `block,<algorithm>...` header and one row per block.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Treat smaller values as better (e.g. error rates).
    #[arg(long)]
    pub lower_is_better: bool,
    /// Directory for ranks.csv, nemenyi.csv and report.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

const USAGE: u8 = 1;
const DATA: u8 = 2;
const INTERNAL: u8 = 3;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " "))
}

/// Error chain joined by `: `, skipping causes already quoted by their wrapper.
fn chain(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if out.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

fn report(kind: &str, code: u8, message: &str) -> ExitCode {
    eprintln!("error kind={kind} code={code} message={}", quote(message));
    ExitCode::from(code)
}

/// Configuration mistakes count as usage errors, every other library error
/// as a data error, and anything else as internal.
fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    match err.downcast_ref::<sshmc::Error>() {
        Some(e @ sshmc::Error::Config(_)) => (e.kind(), USAGE),
        Some(e) => (e.kind(), DATA),
        None => ("internal", INTERNAL),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Benchmark(a) => commands::benchmark(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::Synth(a) => commands::synth(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return report("usage", USAGE, &e.kind().to_string());
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            let (kind, code) = classify(&e);
            report(kind, code, &chain(&e))
        }
        Err(_) => report("panic", INTERNAL, "internal error"),
    }
}
