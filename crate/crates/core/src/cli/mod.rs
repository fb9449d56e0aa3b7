//! Command-line surface: `run`, `check`, `bench`, `sweep`.
//!
//! Exit codes: 0 clean, 1 check failure (also: stability gate refused, I/O
//! failure), 2 invariant violation, 3 divergence, 64 usage or configuration
//! error.

pub mod bench;
pub mod check;
pub mod sweep;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::integrator::{run, RunOutcome, RunStatus};
use crate::io::config::{parse_config, SimConfig};
use crate::io::output::OutputWriter;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "grayscott", version, about = "Gray-Scott simulator with local and nonlocal diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one configuration; writes snapshots, invariants.csv and optional PGMs.
    Run {
        config: PathBuf,
        /// Override `output_dir` from the configuration.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the built-in oracle and property checks on small grids.
    Check,
    /// Time spectral vs direct convolution and the per-step cost of both models.
    Bench {
        config: PathBuf,
        /// Minimum measuring time per (size, op) cell.
        #[arg(long, default_value_t = 200)]
        min_time_ms: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a grid of configurations, one output subdirectory per cell.
    Sweep {
        config: PathBuf,
        /// `key=start:end:count`, repeatable.
        #[arg(long = "param", required = true)]
        params: Vec<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Exit code for a finished run.
pub fn exit_code(outcome: &RunOutcome) -> i32 {
    match outcome.status {
        RunStatus::Clean => EXIT_OK,
        RunStatus::Violations => EXIT_VIOLATION,
        RunStatus::Diverged { .. } => EXIT_DIVERGED,
    }
}

/// Exit code for a run that failed before or while stepping.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parameter(_) => EXIT_USAGE,
        Error::Divergence { .. } => EXIT_DIVERGED,
        _ => EXIT_CHECK_FAILED,
    }
}

fn load_config(path: &Path) -> Result<(String, SimConfig), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let config = parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((text, config))
}

/// Runs a configuration with file outputs and returns its exit code.
pub fn run_to_dir(config: &SimConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut writer = match OutputWriter::create(&config.output_dir, config.emit_images) {
        Ok(w) => w,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    match run(config, &mut writer) {
        Ok(outcome) => {
            let s = &outcome.final_state;
            let _ = writeln!(
                out,
                "{} variant, {}x{}: {} steps, t = {}, std(v) = {:.6e}, {} reports -> {}",
                config.variant,
                s.nx(),
                s.ny(),
                s.step,
                s.time(),
                s.v.std_dev(),
                outcome.reports.len(),
                writer.dir().display()
            );
            match &outcome.status {
                RunStatus::Clean => {}
                RunStatus::Violations => {
                    let _ = writeln!(err, "invariant violations recorded; see {}", crate::io::output::INVARIANTS_FILE);
                }
                RunStatus::Diverged { step, reason } => {
                    let _ = writeln!(err, "diverged at step {step}: {reason}");
                }
            }
            exit_code(&outcome)
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_exit_code(&e)
        }
    }
}

/// Entry point shared by the binary and the tests.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };

    match cli.command {
        Command::Run { config, output_dir } => {
            let (_, mut cfg) = match load_config(&config) {
                Ok(c) => c,
                Err(msg) => {
                    let _ = writeln!(err, "error: {msg}");
                    return EXIT_USAGE;
                }
            };
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            run_to_dir(&cfg, out, err)
        }
        Command::Check => {
            let results = check::run_all();
            let mut failed = 0;
            for r in &results {
                let _ = writeln!(out, "{r}");
                failed += usize::from(!r.passed);
            }
            let _ = writeln!(out, "{} checks, {failed} failed", results.len());
            if failed == 0 {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Command::Bench {
            config,
            min_time_ms,
            out: csv_path,
        } => {
            let (_, cfg) = match load_config(&config) {
                Ok(c) => c,
                Err(msg) => {
                    let _ = writeln!(err, "error: {msg}");
                    return EXIT_USAGE;
                }
            };
            let rows = match bench::run_bench(&cfg, &bench::SIZES, Duration::from_millis(min_time_ms)) {
                Ok(rows) => rows,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_CHECK_FAILED;
                }
            };
            let csv = bench::to_csv(&rows);
            match csv_path {
                Some(p) => {
                    if let Err(e) = fs::write(&p, csv) {
                        let _ = writeln!(err, "error: cannot write {}: {e}", p.display());
                        return EXIT_CHECK_FAILED;
                    }
                }
                None => {
                    let _ = write!(out, "{csv}");
                }
            }
            EXIT_OK
        }
        Command::Sweep { config, params, jobs } => {
            let (text, cfg) = match load_config(&config) {
                Ok(c) => c,
                Err(msg) => {
                    let _ = writeln!(err, "error: {msg}");
                    return EXIT_USAGE;
                }
            };
            let axes = match params.iter().map(|p| sweep::SweepAxis::parse(p)).collect::<Result<Vec<_>, _>>() {
                Ok(a) => a,
                Err(msg) => {
                    let _ = writeln!(err, "error: {msg}");
                    return EXIT_USAGE;
                }
            };
            match sweep::run_sweep(&text, &cfg.output_dir, &axes, jobs) {
                Ok(cells) => {
                    for c in &cells {
                        let _ = writeln!(out, "{} {} -> {}", c.dir.display(), c.status, c.exit_code);
                    }
                    cells.iter().map(|c| c.exit_code).max().unwrap_or(EXIT_OK)
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    error_exit_code(&e)
                }
            }
        }
    }
}
