use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gnp_vlc::config::{ExperimentConfig, Scheme};
use gnp_vlc::experiments::{run_experiment, with_threads, write_outputs, Experiment};

/// Secrecy-rate and SER experiments for GNP-plate visible-light links.
#[derive(Parser)]
#[command(name = "gnp-vlc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Secrecy rate over a grid of eavesdropper positions.
    Heatmap(RunArgs),
    /// Suboptimal vs optimal transmit angles over random eavesdropper placements.
    GapHist(RunArgs),
    /// Secrecy rate along a line of Bob positions.
    BobSweep(RunArgs),
    /// Monte Carlo symbol error rates over a transmit-power sweep.
    Ser(RunArgs),
    /// Fixed eavesdroppers plus one roaming over the grid.
    MultiEve(RunArgs),
    /// Print the default configuration as TOML.
    DefaultConfig,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Gnp,
    Baseline,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Restricts the run to one scheme (default: as configured).
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(experiment: Experiment, args: RunArgs) -> gnp_vlc::Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    }
    if let Some(s) = args.scheme {
        cfg.schemes = vec![match s {
            SchemeArg::Gnp => Scheme::Gnp,
            SchemeArg::Baseline => Scheme::Baseline,
        }];
    }
    cfg.validate()?;
    let output = with_threads(cfg.threads, || run_experiment(experiment, &cfg))??;
    let manifest = write_outputs(&args.out, experiment.name(), &cfg, &output.files, output.summary)?;
    for (name, _) in &output.files {
        println!("{}", args.out.join(name).display());
    }
    println!("{}", manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Heatmap(a) => run(Experiment::Heatmap, a),
        Command::GapHist(a) => run(Experiment::GapHist, a),
        Command::BobSweep(a) => run(Experiment::BobSweep, a),
        Command::Ser(a) => run(Experiment::Ser, a),
        Command::MultiEve(a) => run(Experiment::MultiEve, a),
        Command::DefaultConfig => ExperimentConfig::default().to_toml_string().map(|s| print!("{s}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
