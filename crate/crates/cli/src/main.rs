use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hybridplan_cli::config::MethodChoice;
use hybridplan_cli::{run, Overrides, Stage, EXIT_ERROR};

/// Hybrid additive/subtractive manufacturability analysis and planning.
#[derive(Debug, Parser)]
#[command(name = "hybridplan", version)]
struct Cli {
    #[command(subcommand)]
    stage: Stage,

    /// Job configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Artifact directory [default: <config stem>.job next to the config].
    #[arg(long, global = true)]
    job_dir: Option<PathBuf>,

    /// Number of plans to return.
    #[arg(long, global = true)]
    k_best: Option<usize>,

    /// Tolerance zone half-width in mm.
    #[arg(long, global = true)]
    tolerance_mm: Option<f64>,

    /// Correlation backend.
    #[arg(long, global = true, value_enum)]
    method: Option<MethodChoice>,

    /// Leave `generated_at` out of reports so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let Some(config) = cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(EXIT_ERROR);
    };
    let o = Overrides {
        job_dir: cli.job_dir,
        k_best: cli.k_best,
        tolerance_mm: cli.tolerance_mm,
        method: cli.method,
        no_timestamp: cli.no_timestamp,
    };
    match run(cli.stage, &config, &o) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
