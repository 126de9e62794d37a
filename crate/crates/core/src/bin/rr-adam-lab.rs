use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rr_adam_lab::harness::{emit, run_experiment, Experiment, ExperimentConfig, Format};
use rr_adam_lab::LabError;

#[derive(Parser)]
#[command(version, about = "Random-reshuffling Adam experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Beta2 sweep on the averaged counterexample
    Fig3(Common),
    /// GD at or above the divergence threshold on the lower-bound landscape
    Thm2Diverge(Common),
    /// GD below the divergence threshold on the lower-bound landscape
    Thm2Slow(Common),
    /// GD step-size grid against RR-Adam
    Compare(Common),
    /// Bounded-update and u-gap checks over a (beta1, beta2) grid
    Lemmas(Common),
    /// RR-Adam on an objective given in the config
    Custom(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config; absent fields take the experiment defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run a single seed instead of the configured list
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

fn run(experiment: Experiment, args: Common) -> Result<bool, LabError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::defaults(experiment),
    };
    if cfg.experiment != experiment {
        return Err(LabError::Config(format!(
            "config is for {:?}, subcommand runs {:?}",
            cfg.experiment, experiment
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = args.out {
        cfg.out_dir = Some(out);
    }
    let out = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let report = run_experiment(&cfg)?;
    let format = match args.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    emit(&report, format, &out)?;
    for c in &report.conclusions {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {}", out.join(experiment.slug()).display());
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Fig3(a) => (Experiment::Fig3, a),
        Command::Thm2Diverge(a) => (Experiment::Thm2Divergence, a),
        Command::Thm2Slow(a) => (Experiment::Thm2Slow, a),
        Command::Compare(a) => (Experiment::AdamVsGd, a),
        Command::Lemmas(a) => (Experiment::LemmaSuite, a),
        Command::Custom(a) => (Experiment::Custom, a),
    };
    match run(experiment, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
