use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hetbias::{Command, RunManifest};
use hetbias_core::Scheme;

/// Velocity-aware small-cell biasing experiments.
#[derive(Debug, Parser)]
#[command(name = "hetbias", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Coverage of three-stage, CRE and full search across user convexity.
    Sweep(Common),
    /// Bandwidth each scheme needs to meet every class minimum.
    Bandwidth(Common),
    /// Per-state volumes and user convexity of a trace CSV.
    Analyze {
        /// CSV with header user_id,timestamp,lat,lon,rx_bytes.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Coverage report of one bias vector.
    Evaluate {
        /// Stationary, walking and vehicular bias in dB, e.g. 4,6,0.
        #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true, required = true)]
        bias_db: Vec<f64>,
        /// Take class volumes from the experiment demand at this convexity.
        #[arg(long)]
        convexity: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict to one scheme.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    /// Monte-Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Replace existing output files.
    #[arg(long)]
    overwrite: bool,
    /// Abort on malformed trace rows instead of skipping them.
    #[arg(long)]
    strict: bool,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: hetbias_core::Error| e.to_string())
}

fn manifest(command: Command, common: Common) -> RunManifest {
    RunManifest {
        command,
        config_path: common.config,
        output_dir: common.out,
        seed: common.seed,
        scheme: common.scheme,
        trials: common.trials,
        overwrite: common.overwrite,
        strict: common.strict,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let manifest = match cli.command {
        Sub::Sweep(common) => manifest(Command::Sweep, common),
        Sub::Bandwidth(common) => manifest(Command::Bandwidth, common),
        Sub::Analyze { input, common } => manifest(Command::Analyze { input }, common),
        Sub::Evaluate {
            bias_db,
            convexity,
            common,
        } => {
            let Ok(bias_db) = <[f64; 3]>::try_from(bias_db.as_slice()) else {
                eprintln!("error: --bias-db takes exactly three values (stationary,walking,vehicular)");
                return ExitCode::from(2);
            };
            manifest(Command::Evaluate { bias_db, convexity }, common)
        }
    };
    match hetbias::run(&manifest) {
        Ok(outcome) => {
            for file in outcome.files {
                println!("{}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
