//! `inviscid`: solve, sweep and verify from a JSON config.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use inviscid_core::harness;
use inviscid_core::picard::{self, PicardError};
use inviscid_core::{verify, TimeGrid};

use config::RunConfig;

const EXIT_CONFIG: u8 = 1;
const EXIT_DEGENERATE: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;
const EXIT_FLAGGED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "inviscid",
    version,
    about = "Damped Westervelt/Kuznetsov solves and inviscid-limit sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for CSV output.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Suppress progress and summaries on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// One Picard solve; writes trajectory.csv and picard.csv.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Damping sweep against the b = 0 reference; writes sweep.csv and rates.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Built-in checks against exact solutions.
    Verify,
}

struct Log {
    quiet: bool,
}

impl Log {
    fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn error(&self, msg: impl AsRef<str>) {
        eprintln!("error: {}", msg.as_ref());
    }
}

fn load(path: &Path, log: &Log) -> Result<RunConfig, ExitCode> {
    RunConfig::load(path).map_err(|e| {
        log.error(format!("config: {e}"));
        ExitCode::from(EXIT_CONFIG)
    })
}

fn write_or_fail(log: &Log, result: std::io::Result<()>) -> Result<(), ExitCode> {
    result.map_err(|e| {
        log.error(format!("writing output: {e}"));
        ExitCode::FAILURE
    })
}

fn cmd_solve(path: &Path, out: &Path, log: &Log) -> Result<ExitCode, ExitCode> {
    let cfg = load(path, log)?;
    let domain = cfg.domain.build().map_err(|_| ExitCode::from(EXIT_CONFIG))?;
    let (u0, u1) = cfg.data.build(&domain).map_err(|_| ExitCode::from(EXIT_CONFIG))?;
    let grid = TimeGrid::new(cfg.model.final_time, cfg.steps).map_err(|e| {
        log.error(format!("config: {e}"));
        ExitCode::from(EXIT_CONFIG)
    })?;
    match picard::solve(&u0, &u1, &cfg.model, grid, &cfg.picard) {
        Ok((traj, report)) => {
            write_or_fail(
                log,
                output::write(
                    out,
                    "trajectory.csv",
                    "t,l2,h1,h2,e_partial",
                    &output::trajectory_rows(&traj),
                ),
            )?;
            write_or_fail(
                log,
                output::write(out, "picard.csv", "iter,diff,ratio", &output::picard_rows(&report)),
            )?;
            log.info(format!(
                "converged in {} iterations; alpha in [{:.4}, {:.4}]{}",
                report.iterations,
                report.degeneracy.min_alpha,
                report.degeneracy.max_alpha,
                if report.degeneracy.violated {
                    " (outside the non-degeneracy band)"
                } else {
                    ""
                }
            ));
            Ok(ExitCode::SUCCESS)
        }
        Err(PicardError::NoConvergence { report }) => {
            write_or_fail(
                log,
                output::write(out, "picard.csv", "iter,diff,ratio", &output::picard_rows(&report)),
            )?;
            log.error(format!("no convergence after {} iterations", report.iterations));
            Ok(ExitCode::from(EXIT_NO_CONVERGENCE))
        }
        Err(e @ PicardError::Degeneracy(_)) => {
            log.error(e.to_string());
            Ok(ExitCode::from(EXIT_DEGENERATE))
        }
        Err(e @ (PicardError::Config { .. } | PicardError::Model(_))) => {
            log.error(format!("config: {e}"));
            Ok(ExitCode::from(EXIT_CONFIG))
        }
        Err(e @ PicardError::Solve(_)) => {
            log.error(e.to_string());
            Ok(ExitCode::from(EXIT_NO_CONVERGENCE))
        }
    }
}

fn cmd_sweep(path: &Path, out: &Path, log: &Log) -> Result<ExitCode, ExitCode> {
    let cfg = load(path, log)?;
    let Some(sweep) = &cfg.sweep else {
        log.error("config: missing `sweep` section with `b_values`");
        return Err(ExitCode::from(EXIT_CONFIG));
    };
    let spec = cfg.sweep_spec(sweep);
    let result = match harness::run_sweep(&spec) {
        Ok(r) => r,
        Err(harness::HarnessError::Reference(e @ PicardError::Degeneracy(_))) => {
            log.error(format!("reference solve: {e}"));
            return Ok(ExitCode::from(EXIT_DEGENERATE));
        }
        Err(harness::HarnessError::Reference(e)) => {
            log.error(format!("reference solve: {e}"));
            return Ok(ExitCode::from(EXIT_NO_CONVERGENCE));
        }
        Err(e) => {
            log.error(format!("config: {e}"));
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    write_or_fail(
        log,
        output::write(
            out,
            "sweep.csv",
            "b,e_diff,x_diff,iters,degenerate",
            &output::sweep_rows(&result),
        ),
    )?;
    write_or_fail(
        log,
        output::write(out, "rates.csv", "norm,slope,intercept,r2", &output::rate_rows(&result)),
    )?;
    for w in &result.warnings {
        log.info(format!("warning: {w}"));
    }
    for s in &result.rates.series {
        if let Some(f) = s.fit {
            log.info(format!("{}: slope {:.4}, r2 {:.6}", s.norm, f.slope, f.r_squared));
        }
    }
    if result.any_flagged() {
        log.error("one or more sweep members failed or left the non-degeneracy band");
        return Ok(ExitCode::from(EXIT_FLAGGED));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(log: &Log) -> ExitCode {
    let checks = verify::run_battery();
    for c in &checks {
        log.info(format!(
            "{} {}: {:.3e} (tolerance {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        ));
    }
    if checks.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Log { quiet: cli.quiet };
    let result = match &cli.command {
        Command::Solve { config } => cmd_solve(config, &cli.out, &log),
        Command::Sweep { config } => cmd_sweep(config, &cli.out, &log),
        Command::Verify => Ok(cmd_verify(&log)),
    };
    result.unwrap_or_else(|code| code)
}
