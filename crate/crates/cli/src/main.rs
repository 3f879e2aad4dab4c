//! `vskf`: simulate sparse visibilities, interpolate them with RBF or VSK
//! kernels and reconstruct images by projected Landweber iteration.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::config::{Mode, Overrides, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Parser)]
#[command(
    name = "vskf",
    version,
    about = "Kernel interpolation and Landweber inversion of sparse Fourier visibilities"
)]
struct Cli {
    #[arg(value_enum)]
    mode: Mode,
    /// JSON run configuration; flags below override its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Land-VSK (on) or Land-RBF (off)
    #[arg(long, value_enum, global = true)]
    vsk: Option<Switch>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Visibility CSV, surface directory or image file, depending on mode
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Ground-truth source model JSON; enables RRMSE
    #[arg(long, global = true)]
    truth: Option<PathBuf>,
    /// Write the Landweber iteration log
    #[arg(long, global = true)]
    iterlog: bool,
    /// Independent simulated reconstructions, seeds seed..seed+k
    #[arg(long, global = true)]
    repeat: Option<usize>,
    /// Print the effective configuration and exit
    #[arg(long, global = true)]
    print_config: bool,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("VSKF_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("VSKF_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.apply(
        cli.mode,
        Overrides {
            seed: cli.seed,
            vsk: cli.vsk.map(|s| s == Switch::On),
            out: cli.out,
            truth: cli.truth,
            input: cli.input,
            iterlog: cli.iterlog,
            repeat: cli.repeat,
        },
    );
    if cli.print_config {
        // a closed pipe is not an error for a config dump
        let _ = writeln!(
            std::io::stdout(),
            "{}",
            serde_json::to_string_pretty(&cfg).expect("config serializes")
        );
        return Ok(());
    }
    commands::run(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::Usage(e.to_string().trim().to_string()).to_json());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
