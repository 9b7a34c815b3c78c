//! Command-line front end: `run` a configured simulation, `resume` one from a
//! snapshot, or `verify` a named check bundle.
//!
//! Exit codes: 0 success, 2 configuration/usage error, 3 numerical blow-up,
//! 4 area-drift abort, 5 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use patchsim::config::{parse_config, SimConfig};
use patchsim::error::Error;
use patchsim::sim::{resume_simulation, run_simulation, AbortReason, RunSummary};
use patchsim::verify;

/// When set, overrides `output_dir` from the config file, and roots the
/// scratch space of `verify` bundles.
const OUTPUT_DIR_ENV: &str = "PATCHSIM_OUTPUT_DIR";

const EXIT_CONFIG: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_AREA_ABORT: u8 = 4;
const EXIT_VERIFY_FAIL: u8 = 5;

#[derive(Parser)]
#[command(
    name = "patchsim",
    version,
    about = "Density-patch transport-Stokes simulator on the periodic square"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a key = value config file.
    Run { config: PathBuf },
    /// Resume a simulation from a snapshot file, under the given config.
    Resume { snapshot: PathBuf, config: PathBuf },
    /// Run one verification bundle and print its pass/fail table.
    #[command(after_help = format!("Bundles: {}", verify::SUBCOMMANDS.join(", ")))]
    Verify { bundle: String },
}

fn load_config(path: &Path) -> Result<SimConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
        cfg.output_dir = PathBuf::from(dir);
    }
    Ok(cfg)
}

fn report_summary(summary: &RunSummary) {
    println!(
        "steps={} final_t={} snapshots={} dt_max={}",
        summary.steps,
        summary.final_t,
        summary.records.len(),
        summary.dt_max
    );
}

fn finish_run(result: Result<RunSummary, Error>) -> ExitCode {
    match result {
        Ok(summary) => {
            report_summary(&summary);
            match summary.abort {
                None => {
                    println!("status=completed");
                    ExitCode::SUCCESS
                }
                Some(AbortReason::AreaDrift { t, relative_error }) => {
                    println!("status=area_abort t={t} relative_error={relative_error:e}");
                    ExitCode::from(EXIT_AREA_ABORT)
                }
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Blowup { .. } => ExitCode::from(EXIT_BLOWUP),
                _ => ExitCode::from(EXIT_CONFIG),
            }
        }
    }
}

fn verify_scratch() -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => std::env::temp_dir().join(format!("patchsim-verify-{}", std::process::id())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => finish_run(load_config(&config).and_then(|cfg| run_simulation(&cfg))),
        Command::Resume { snapshot, config } => finish_run(
            load_config(&config).and_then(|cfg| resume_simulation(&cfg, &snapshot)),
        ),
        Command::Verify { bundle } => {
            let scratch = verify_scratch();
            if let Err(err) = std::fs::create_dir_all(&scratch) {
                eprintln!("error: cannot create scratch directory {}: {err}", scratch.display());
                return ExitCode::from(EXIT_CONFIG);
            }
            let mut stdout = std::io::stdout().lock();
            match verify::run_subcommand(&bundle, &scratch, &mut stdout) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(EXIT_VERIFY_FAIL),
                Err(err) => {
                    eprintln!("error: {err}");
                    ExitCode::from(EXIT_CONFIG)
                }
            }
        }
    }
}
