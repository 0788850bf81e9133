//! `ptwell`: spectra, densities, closed-form solutions and the verification
//! suite for the time-dependent-mass particle in the imaginary |x| well.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::Run;
use config::{check_levels, check_times, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "ptwell", version, about)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; tables go to stdout when omitted.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Levels, e.g. `0,2,4` or `0-5`.
    #[arg(long = "n", global = true, value_name = "LIST", allow_hyphen_values = true)]
    levels: Option<String>,

    /// Times, e.g. `0.1,0.3,0.5`.
    #[arg(long = "t", global = true, value_name = "LIST")]
    times: Option<String>,

    /// Debug: report -k(t) everywhere.
    #[arg(long, global = true, hide = true)]
    inject_wrong_sign_k: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// First zeros a_k of Ai and a'_k of Ai'.
    Zeros {
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// (n, parity, λ_n, N_n) rows.
    Spectrum,
    /// One (x, φ_n²) file per level on [-10, 10].
    Density,
    /// One (x, Re Ψ, Im Ψ, reconstructed density) file per (n, t).
    Solve,
    /// Residual suite; exits 1 if any check fails.
    Verify,
}

fn parse_levels(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().with_context(|| format!("--n: bad range `{part}`"))?;
                let b: usize = b.trim().parse().with_context(|| format!("--n: bad range `{part}`"))?;
                out.extend(a..=b);
            }
            None => out.push(part.parse().with_context(|| format!("--n: bad level `{part}`"))?),
        }
    }
    check_levels(&out).context("--n")?;
    Ok(out)
}

fn parse_times(text: &str, t_max: f64) -> Result<Vec<f64>> {
    let out = text
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().with_context(|| format!("--t: bad time `{p}`")))
        .collect::<Result<Vec<_>>>()?;
    check_times("--t", &out, t_max)?;
    Ok(out)
}

/// Ok(true) on success, Ok(false) on a failed verification.
fn run(cli: Cli) -> Result<bool> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let levels = cli.levels.as_deref().map(parse_levels).transpose()?;
    let times = cli.times.as_deref().map(|t| parse_times(t, cfg.t_max())).transpose()?;
    let run = Run {
        format: cli.format.unwrap_or(cfg.format),
        cfg,
        levels,
        times,
        out: cli.out,
        flip_k: cli.inject_wrong_sign_k,
    };
    match cli.command {
        Command::Zeros { count } => commands::zeros(&run, count)?,
        Command::Spectrum => commands::spectrum(&run)?,
        Command::Density => commands::density(&run)?,
        Command::Solve => commands::solve(&run)?,
        Command::Verify => return commands::verify(&run),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
