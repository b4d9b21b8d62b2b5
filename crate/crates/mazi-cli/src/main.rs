use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mazi_cli::{run, Command, RunConfig};

/// Joint node-embedding and hierarchical-community training, with a
/// synthetic-benchmark generator and link-prediction / node-classification
/// evaluation.
#[derive(Parser)]
#[command(name = "mazi", version)]
struct Cli {
    #[command(subcommand)]
    command: Subcommand,
    /// Key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Output directory for all artifacts.
    #[arg(long, default_value = "run", global = true)]
    out: PathBuf,
    /// Override the seed key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(clap::Subcommand)]
enum Subcommand {
    /// Generate a synthetic hierarchical benchmark graph.
    Generate,
    /// Greedy modularity partition of an input graph.
    Partition,
    /// Train embeddings and the community hierarchy.
    Train,
    /// Link prediction: split, embed, and report MAP.
    EvalLp,
    /// Node classification: embed, fit one-vs-rest logistic regression,
    /// and report micro/macro F1.
    EvalNc,
    /// Train and evaluate the full model against its β/γ ablations.
    Ablate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(path) => match RunConfig::from_file(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        },
        None => RunConfig::default(),
    };
    if let Err(e) = config.apply_set_flags(&cli.sets) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    if let Some(seed) = cli.seed {
        config.set("seed", &seed.to_string()).expect("seed is a known key");
    }
    let cmd = match cli.command {
        Subcommand::Generate => Command::Generate,
        Subcommand::Partition => Command::Partition,
        Subcommand::Train => Command::Train,
        Subcommand::EvalLp => Command::EvalLp,
        Subcommand::EvalNc => Command::EvalNc,
        Subcommand::Ablate => Command::Ablate,
    };
    match run(cmd, &config, &cli.out, cli.quiet) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
